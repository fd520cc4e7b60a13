// Optional heavyweight dependency, loaded dynamically when a xenova:<id>
// backend is requested; typed as any so the package compiles without it.
declare module '@xenova/transformers';
