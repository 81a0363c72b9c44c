/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const cdm_run: (a: bigint, b: number, c: number, d: number) => [number, number];
export const project_point: (a: number, b: number, c: number) => [number, number];
export const w_block: (a: number, b: number, c: number) => [number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
