/* tslint:disable */
/* eslint-disable */

/**
 * NCE, MIS and quadratic-score costs on a log grid of `Z` around the
 * truth, with the optimal-bridge estimate for the same samples.
 */
export function cost_curves(n: number, m: number, sigma_p: number, seed: bigint, points: number): string;

/**
 * Runs the table-based estimators on one sample set for `iters` steps
 * from `z0`, returning estimates and iterate traces.
 */
export function estimate_z(n: number, m: number, sigma_p: number, seed: bigint, z0: number, iters: number): string;

/**
 * MSE against `sigma_p` for one `(N, M)` split and scenario, on the
 * default twelve-point grid.
 */
export function mse_sweep(n: number, m: number, replications: number, scenario: string, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cost_curves: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number, number];
    readonly estimate_z: (a: number, b: number, c: number, d: bigint, e: number, f: number) => [number, number, number, number];
    readonly mse_sweep: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
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
