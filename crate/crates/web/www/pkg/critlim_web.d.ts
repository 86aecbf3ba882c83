/* tslint:disable */
/* eslint-disable */

/**
 * Histogram of draws of `C t Z Z~ N^2` (first order) or
 * `sqrt(D t Z Z~ N^2) eta` (second order).
 */
export class Histogram {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    counts(): Uint32Array;
    edges(): Float64Array;
    mean(): number;
    target_mean(): number;
}

/**
 * One-dimensional sample paths on a log-spaced grid up to `e^{nt}`.
 */
export class Paths {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    count(): number;
    nodes(): Float64Array;
    /**
     * Row-major `[path][node]`.
     */
    values(): Float64Array;
}

/**
 * JSON object with the variance constants, `lambda`, `C` and the first
 * four limit moments at `t = 1`.
 */
export function constants(family: string, h: number, k: number, d: number, sigma: number): string;

export function limit_histogram(second: boolean, lambda: number, constant: number, count: number, bins: number, seed: number): Histogram;

export function sample_paths(family: string, h: number, k: number, n: number, m_log: number, count: number, seed: number): Paths;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_histogram_free: (a: number, b: number) => void;
    readonly __wbg_paths_free: (a: number, b: number) => void;
    readonly constants: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly histogram_counts: (a: number) => [number, number];
    readonly histogram_edges: (a: number) => [number, number];
    readonly histogram_mean: (a: number) => number;
    readonly histogram_target_mean: (a: number) => number;
    readonly limit_histogram: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly paths_count: (a: number) => number;
    readonly paths_nodes: (a: number) => [number, number];
    readonly paths_values: (a: number) => [number, number];
    readonly sample_paths: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
