// API payload shapes, mirroring the service's JSON exactly.
export {};
