export {
  ArrayView,
  ElementType,
  at,
  elementType,
  fromRows,
  isArrayView,
  isPacked,
  packedCopy,
  view,
  viewBytes,
} from "./views.js";

export {
  ELEM_F32,
  FORMAT_VERSION,
  HEADER_BYTES,
  MAGIC,
  PropertyColumn,
  PropertyKind,
  readMatrix,
  readMatrixCsv,
  writeMatrix,
  writeMatrixCsv,
  writeProperties,
  writeSequences,
} from "./formats.js";

export { RunResult, coreError, runCli } from "./runner.js";

export {
  Cell,
  EngineRepresentation,
  ErrorCell,
  EvaluateOptions,
  FoldSpec,
  GroupData,
  MetricEntry,
  MetricHeader,
  Report,
  Representation,
  RepresentationFn,
  ValueCell,
  cellOf,
  evaluate,
  isErrorCell,
  valueOf,
} from "./evaluate.js";

export {
  ConformityOptions,
  DiversityOptions,
  HypervolumeOptions,
  KlOptions,
  KmerEmbedOptions,
  MatrixLike,
  MmdOptions,
  VendiFkeaOptions,
  VendiOptions,
  asView,
  authenticity,
  conformity,
  diversity,
  fas,
  fbd,
  hitRate,
  hypervolume,
  identity,
  kl,
  klCategorical,
  kmerEmbed,
  levenshtein,
  mmd,
  ngram,
  novelty,
  precision,
  recall,
  spearman,
  thresholdRate,
  uniqueness,
  vendi,
  vendiFkea,
} from "./metrics.js";
