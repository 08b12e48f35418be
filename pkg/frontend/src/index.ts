export { encodeCfea, decodeCfea, MAGIC, VERSION } from './cfea.js'
export type { CfeaPayload } from './cfea.js'
export { readCropIndex } from './cropIndex.js'
export type { CropEntry } from './cropIndex.js'
export {
  getBackbone,
  listBackbones,
  registerBackbone,
} from './backbones.js'
export type { Backbone, BackboneModel, Preprocessing } from './backbones.js'
export { exportFeatures } from './exporter.js'
export type { ExportJob, ExportResult } from './exporter.js'
export { readCropPng, resizeNearest } from './png.js'
export type { CropImage } from './png.js'
export {
  DataError,
  ExportError,
  FetchError,
  FormatError,
  ParamError,
} from './errors.js'
export { run } from './cli.js'
