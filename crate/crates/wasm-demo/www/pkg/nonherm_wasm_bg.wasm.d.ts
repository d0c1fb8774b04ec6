/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const model_b_series: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const parity_vs_k: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const spectrum_vs_gamma: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
