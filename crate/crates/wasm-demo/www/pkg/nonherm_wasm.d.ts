/* tslint:disable */
/* eslint-disable */

/**
 * `⟨σ_component⟩(t)` of model B for the metric, no-jump and master-equation
 * methods, from the Bloch vector `(x0, y0, z0)` on the sphere.
 *
 * Stride 4: `t, metric, nj, me`.
 */
export function model_b_series(omega: number, gamma: number, t_max: number, dt: number, x0: number, y0: number, z0: number, component: number): Float64Array;

/**
 * Final-time `⟨σz⟩` per momentum for the sweep `Δ(t) = t` on
 * `[-t_end, t_end]`, starting from the excited state.
 *
 * Stride 3: `k, metric, nj`.
 */
export function parity_vs_k(gamma: number, t_end: number, dt: number, k_max: number, n_k: number): Float64Array;

/**
 * Eigenvalues of `ωσx - iγσz` for `n` values of `γ` in `[0, gamma_max]`.
 * At the exceptional point both eigenvalues are reported as zero.
 *
 * Stride 5: `γ, Re E+, Im E+, Re E-, Im E-`.
 */
export function spectrum_vs_gamma(omega: number, gamma_max: number, n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly model_b_series: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly parity_vs_k: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly spectrum_vs_gamma: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
