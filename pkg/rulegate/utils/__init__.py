from rulegate.utils.converters import as_matrix, convert_bits, convert_boolean, convert_integer
from rulegate.utils.enums import Aggregation, Method, NodeKind, OpCode, Provenance, Split, TrainMode
