/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const h_u_curve: (a: number, b: number, c: number, d: number) => [number, number];
export const landscape_1d: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
export const objective_grid_2d: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number];
export const trajectory_2d: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number, l: number, m: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
