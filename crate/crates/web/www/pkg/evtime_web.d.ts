/* tslint:disable */
/* eslint-disable */

export class Estimate {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly denominator: number;
    readonly e1: number;
    readonly e2: number;
    readonly e3: number;
    readonly e_q: number | undefined;
    readonly nu: number;
    readonly rho_eff: number | undefined;
    readonly t_c: number;
    readonly t_t: number | undefined;
}

export function describe(problem: string): string | undefined;

/**
 * Forward solve plus the error estimate for the given event occurrence.
 */
export function estimate(problem: string, n: number, q_t: number, q_s: number, occurrence: number, adjoint_offset: number): Estimate;

/**
 * `G(U; t)` as interleaved `[t0, G0, t1, G1, ...]`, `per_slab` samples per slab.
 */
export function functional_trace(problem: string, n: number, q_t: number, q_s: number, per_slab: number): Float64Array;

/**
 * Catalog keys, one per line.
 */
export function problems(): string;

/**
 * Event threshold `R` of a catalog problem.
 */
export function threshold(problem: string): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_estimate_free: (a: number, b: number) => void;
    readonly describe: (a: number, b: number) => [number, number];
    readonly estimate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly estimate_denominator: (a: number) => number;
    readonly estimate_e1: (a: number) => number;
    readonly estimate_e2: (a: number) => number;
    readonly estimate_e3: (a: number) => number;
    readonly estimate_e_q: (a: number) => [number, number];
    readonly estimate_nu: (a: number) => number;
    readonly estimate_rho_eff: (a: number) => [number, number];
    readonly estimate_t_c: (a: number) => number;
    readonly estimate_t_t: (a: number) => [number, number];
    readonly functional_trace: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly problems: () => [number, number];
    readonly threshold: (a: number, b: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
