/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_estimate_free: (a: number, b: number) => void;
export const describe: (a: number, b: number) => [number, number];
export const estimate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const estimate_denominator: (a: number) => number;
export const estimate_e1: (a: number) => number;
export const estimate_e2: (a: number) => number;
export const estimate_e3: (a: number) => number;
export const estimate_e_q: (a: number) => [number, number];
export const estimate_nu: (a: number) => number;
export const estimate_rho_eff: (a: number) => [number, number];
export const estimate_t_c: (a: number) => number;
export const estimate_t_t: (a: number) => [number, number];
export const functional_trace: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const problems: () => [number, number];
export const threshold: (a: number, b: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
