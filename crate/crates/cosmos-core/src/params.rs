//! Parameter manifests: names, shapes, and routing kinds.

/// Routing class of a trainable parameter.
///
/// Matrix-hidden parameters get the configured matrix optimizer; embedding-
/// like matrices (input embeddings, output heads) and 1-D vectors are
/// trained by Adam at the scalar-path rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    MatrixHidden,
    EmbeddingLike,
    Vector,
}

impl ParamKind {
    pub fn name(self) -> &'static str {
        match self {
            ParamKind::MatrixHidden => "matrix-hidden",
            ParamKind::EmbeddingLike => "embedding-like",
            ParamKind::Vector => "vector",
        }
    }

    /// Parse the manifest/config spelling of a kind.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "matrix-hidden" => Some(ParamKind::MatrixHidden),
            "embedding-like" => Some(ParamKind::EmbeddingLike),
            "vector" => Some(ParamKind::Vector),
            _ => None,
        }
    }
}

/// One entry of a problem's parameter manifest. Vectors are carried as
/// 1 x n matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub kind: ParamKind,
}

impl ParamSpec {
    pub fn new(name: &str, rows: usize, cols: usize, kind: ParamKind) -> Self {
        Self {
            name: name.to_string(),
            rows,
            cols,
            kind,
        }
    }

    /// Smaller dimension after orientation normalization (rows >= cols).
    pub fn min_dim(&self) -> usize {
        self.rows.min(self.cols)
    }
}
