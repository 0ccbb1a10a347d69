/* tslint:disable */
/* eslint-disable */

/**
 * A simulated sweep with its index and ground truth.
 */
export class Sweep {
    free(): void;
    [Symbol.dispose](): void;
    duration_us(): number;
    events(): number;
    focusCurve(dt_fraction: number, samples: number): Float64Array;
    height(): number;
    /**
     * Simulates `condition` (`static-light`, `static-dark`, `dynamic-light`
     * or `dynamic-dark`) on a `size`×`size` sensor.
     */
    constructor(condition: string, seed: number, size: number, duration_s: number, noise_rate: number);
    position_at(t_us: number): number;
    reconstructRgba(t_us: number, decay: number, span: number): Uint8Array;
    sceneRgba(t_us: number): Uint8Array;
    /**
     * JSON with the golden-search result and trace, the fixed-window result
     * and the ground truth.
     */
    search(mu: number, naive_fraction: number): string;
    truth_position(): number;
    truth_time_us(): number;
    width(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_sweep_free: (a: number, b: number) => void;
    readonly sweep_duration_us: (a: number) => number;
    readonly sweep_events: (a: number) => number;
    readonly sweep_focusCurve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sweep_height: (a: number) => number;
    readonly sweep_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly sweep_position_at: (a: number, b: number) => [number, number, number];
    readonly sweep_reconstructRgba: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly sweep_sceneRgba: (a: number, b: number) => [number, number, number, number];
    readonly sweep_search: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sweep_truth_position: (a: number) => number;
    readonly sweep_truth_time_us: (a: number) => number;
    readonly sweep_width: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
