/* tslint:disable */
/* eslint-disable */

/**
 * Solutions `F_n^(k) = d1..d1 d2..d2` with `k_min <= k <= k_max`, `n <= n_max`.
 */
export function enumerate(k_min: number, k_max: number, n_max: number): string;

/**
 * `e(n) = F_n^(k) - f_k(alpha) alpha^(n-1)` as certified `[lo, hi]` pairs.
 */
export function error_curve(k: number, n_max: number): string;

/**
 * Continued fraction of `log 10 / log 2` up to the first `q > M`, with
 * `a_M = max a_i` and the factor `a_M + 2` in `|x theta - y| > 1/((a_M + 2) x)`.
 */
export function theta_legendre(bound: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly enumerate: (a: number, b: number, c: number) => [number, number, number, number];
    readonly error_curve: (a: number, b: number) => [number, number, number, number];
    readonly theta_legendre: (a: number, b: number) => [number, number, number, number];
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
