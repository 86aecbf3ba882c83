/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_histogram_free: (a: number, b: number) => void;
export const __wbg_paths_free: (a: number, b: number) => void;
export const constants: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const histogram_counts: (a: number) => [number, number];
export const histogram_edges: (a: number) => [number, number];
export const histogram_mean: (a: number) => number;
export const histogram_target_mean: (a: number) => number;
export const limit_histogram: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const paths_count: (a: number) => number;
export const paths_nodes: (a: number) => [number, number];
export const paths_values: (a: number) => [number, number];
export const sample_paths: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
