/* tslint:disable */
/* eslint-disable */

/**
 * `h_u` next to `|t|^p` on `[-t_max, t_max]`, with `u` set by its knee.
 */
export function h_u_curve(p: number, knee: number, t_max: number, samples: number): string;

/**
 * `F` and `F_eps` for `f(x) = (a x - b)^2 / 2`, plus the stationary points
 * and both lower bounds on nonzero stationary entries.
 */
export function landscape_1d(a: number, b: number, lambda: number, p: number, eps: number, t_max: number, samples: number): string;

/**
 * `F` on a `cells x cells` grid over `[-r, r]^2`, row by row (x1 fixed per row).
 */
export function objective_grid_2d(a00: number, a01: number, a10: number, a11: number, b0: number, b1: number, lambda: number, p: number, r: number, cells: number): string;

/**
 * Iterates of one solver on the 2x2 problem with row-major `A`.
 */
export function trajectory_2d(a00: number, a01: number, a10: number, a11: number, b0: number, b1: number, lambda: number, p: number, method: string, alpha: number, x0: number, x1: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly h_u_curve: (a: number, b: number, c: number, d: number) => [number, number];
    readonly landscape_1d: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly objective_grid_2d: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number];
    readonly trajectory_2d: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number, l: number, m: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
