//! Symbol tables for the content dictionaries the engine understands.

pub const TENSOR1: &str = "tensor1";
pub const ARITH1: &str = "arith1";
pub const INTERVAL1: &str = "interval1";
pub const FNS1: &str = "fns1";
pub const LINALG1: &str = "linalg1";
pub const NUMS1: &str = "nums1";

/// Reserved `tensor1` constant naming a frame that was deliberately left open.
/// It is not one of the dictionary's published definitions.
pub const UNSPECIFIED: &str = "unspecified";

/// How many arguments a symbol takes when applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    /// Used bare, never applied.
    Constant,
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Constant => false,
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }

    pub fn describe(self) -> String {
        match self {
            Arity::Constant => "no arguments (constant)".to_owned(),
            Arity::Exactly(1) => "exactly 1 argument".to_owned(),
            Arity::Exactly(k) => format!("exactly {k} arguments"),
            Arity::AtLeast(k) => format!("at least {k} argument(s)"),
        }
    }
}

/// One published definition of the tensor1 dictionary.
#[derive(Debug, Clone, Copy)]
pub struct Tensor1Symbol {
    pub name: &'static str,
    pub role: &'static str,
    pub arity: Arity,
    pub description: &'static str,
}

pub const TENSOR1_SYMBOLS: [Tensor1Symbol; 11] = [
    Tensor1Symbol {
        name: "tuple",
        role: "application",
        arity: Arity::AtLeast(1),
        description: "Builds the ordered n-tuple of its arguments, preserving the order in \
                      which they are given. Coordinate tuples are tuples, not vectors.",
    },
    Tensor1Symbol {
        name: "tuple_selector",
        role: "application",
        arity: Arity::Exactly(2),
        description: "Given an n-tuple and a natural number k with 1 <= k <= n, yields the \
                      k-th element of the tuple.",
    },
    Tensor1Symbol {
        name: "Cartesian",
        role: "application",
        arity: Arity::Exactly(1),
        description: "Given a natural number k, denotes the k-th coordinate of a right-handed \
                      Cartesian (standard) coordinate system.",
    },
    Tensor1Symbol {
        name: "unit_Cartesian",
        role: "application",
        arity: Arity::Exactly(1),
        description: "Given a natural number k, denotes the k-th orthonormal basis vector of a \
                      right-handed Cartesian frame.",
    },
    Tensor1Symbol {
        name: "Kronecker_tensor",
        role: "constant",
        arity: Arity::Constant,
        description: "The mixed identity tensor whose components are 1 when the contravariant \
                      and covariant index values coincide and 0 otherwise.",
    },
    Tensor1Symbol {
        name: "basis_selector",
        role: "application",
        arity: Arity::Exactly(2),
        description: "Given an ordered basis and an index, yields the basis vector for a \
                      covariant index or the dual basis covector for a contravariant index.",
    },
    Tensor1Symbol {
        name: "tensor_selector",
        role: "application",
        arity: Arity::Exactly(3),
        description: "Given a tensor, a tuple of contravariant and covariant indexes whose \
                      length equals the tensor order, and a frame, yields the scalar component. \
                      Components are stored in row-major order.",
    },
    Tensor1Symbol {
        name: "contra_index",
        role: "application",
        arity: Arity::Exactly(1),
        description: "Marks a natural number as a contravariant (upper) index.",
    },
    Tensor1Symbol {
        name: "covar_index",
        role: "application",
        arity: Arity::Exactly(1),
        description: "Marks a natural number as a covariant (lower) index.",
    },
    Tensor1Symbol {
        name: "metric_tensor",
        role: "constant",
        arity: Arity::Constant,
        description: "The symmetric, non-degenerate covariant bilinear form of a frame that \
                      determines lengths; it converts between contravariant and covariant \
                      components.",
    },
    Tensor1Symbol {
        name: "Levi-Civita",
        role: "application",
        arity: Arity::Exactly(1),
        description: "Given the dimension n, denotes the totally antisymmetric permutation \
                      symbol of order n: the sign of the index permutation, 0 on repeats.",
    },
];

pub fn tensor1_symbol(name: &str) -> Option<&'static Tensor1Symbol> {
    TENSOR1_SYMBOLS.iter().find(|s| s.name == name)
}

/// Names the `tensor1` dictionary accepts, including the reserved constant.
pub fn is_tensor1_name(name: &str) -> bool {
    name == UNSPECIFIED || tensor1_symbol(name).is_some()
}

const ARITH1_SYMBOLS: [(&str, Arity); 7] = [
    ("plus", Arity::AtLeast(1)),
    ("times", Arity::AtLeast(1)),
    ("minus", Arity::Exactly(2)),
    ("divide", Arity::Exactly(2)),
    ("power", Arity::Exactly(2)),
    ("unary_minus", Arity::Exactly(1)),
    ("abs", Arity::Exactly(1)),
];

pub fn is_arith1_name(name: &str) -> bool {
    ARITH1_SYMBOLS.iter().any(|(n, _)| *n == name)
}

/// Arity of any symbol the evaluator supports; `None` means unsupported.
pub fn arity_of(cd: &str, name: &str) -> Option<Arity> {
    match cd {
        TENSOR1 if name == UNSPECIFIED => Some(Arity::Constant),
        TENSOR1 => tensor1_symbol(name).map(|s| s.arity),
        ARITH1 => ARITH1_SYMBOLS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, a)| *a),
        LINALG1 if name == "vector_selector" => Some(Arity::Exactly(2)),
        NUMS1 if matches!(name, "pi" | "e") => Some(Arity::Constant),
        _ => None,
    }
}
