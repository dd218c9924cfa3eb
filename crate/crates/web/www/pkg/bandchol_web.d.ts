/* tslint:disable */
/* eslint-disable */

/**
 * Factors a generated matrix with the blocked algorithm and reports the
 * task graph shape and accuracy against the reference factorization.
 */
export function factor_demo(dim: number, bandwidth: number, grid_dim: number, seed: number): string;

/**
 * Exact and approximate operation counts for each bandwidth in `0..=max_bandwidth`
 * in `steps` even steps.
 */
export function flop_curve(dim: number, max_bandwidth: number, steps: number): string;

/**
 * Cell extents of the first windows of the plan for `(dim, bandwidth)`.
 * `grid_dim = 0` picks the grid by heuristic.
 */
export function plan_grid(dim: number, bandwidth: number, grid_dim: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly factor_demo: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly flop_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly plan_grid: (a: number, b: number, c: number) => [number, number, number, number];
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
