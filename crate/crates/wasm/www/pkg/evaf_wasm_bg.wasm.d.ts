/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_sweep_free: (a: number, b: number) => void;
export const sweep_duration_us: (a: number) => number;
export const sweep_events: (a: number) => number;
export const sweep_focusCurve: (a: number, b: number, c: number) => [number, number, number, number];
export const sweep_height: (a: number) => number;
export const sweep_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const sweep_position_at: (a: number, b: number) => [number, number, number];
export const sweep_reconstructRgba: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const sweep_sceneRgba: (a: number, b: number) => [number, number, number, number];
export const sweep_search: (a: number, b: number, c: number) => [number, number, number, number];
export const sweep_truth_position: (a: number) => number;
export const sweep_truth_time_us: (a: number) => number;
export const sweep_width: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
