/* tslint:disable */
/* eslint-disable */

/**
 * A running simulation on an `n × n` grid over `[-L/2, L/2)²`.
 */
export class Lab {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advances `k` steps; fails on a CFL violation or blow-up.
     */
    advance(k: number): void;
    /**
     * Row-major samples (x fastest) of the current field.
     */
    field(): Float64Array;
    l2(): number;
    /**
     * `kind` is `"gaussian"`, `"dx_gaussian"` or `"bumps"`.
     */
    constructor(n: number, length: number, kind: string, amplitude: number, dt: number, mu: number);
    time(): number;
    /**
     * Unique-continuation verdict for the initial data. Evolved fields, and
     * the sech² bumps, fail the indicator's resolution audit on demo grids.
     */
    uc_verdict(t: number): string;
}

/**
 * `β_N` sampled at `samples` points on `[0, x_max]`.
 */
export function beta_curve(n: number, x_max: number, samples: number): Float64Array;

/**
 * `𝒟^b f` at `samples` points on `[-width, width]` for `f` a Heaviside
 * step (`"step"`), a Gaussian bump (`"bump"`) or the phase `e^{iπx²/4}`
 * (`"chirp"`).
 */
export function stein_profile(kind: string, b: number, width: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_lab_free: (a: number, b: number) => void;
    readonly beta_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly lab_advance: (a: number, b: number) => [number, number];
    readonly lab_field: (a: number) => [number, number];
    readonly lab_l2: (a: number) => number;
    readonly lab_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly lab_time: (a: number) => number;
    readonly lab_uc_verdict: (a: number, b: number) => [number, number, number, number];
    readonly stein_profile: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
