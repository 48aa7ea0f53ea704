use thiserror::Error;

#[derive(Debug, Error)]
pub enum HullError {
    #[error("degenerate input: points span an affine space of dimension {dimension}")]
    Degenerate { dimension: usize },

    #[error("alpha = {alpha} keeps no tetrahedron")]
    EmptyShape { alpha: f64 },

    #[error("mesh is not closed: {} unmatched edges, first {:?}", .boundary_edges.len(), .boundary_edges.first())]
    Topology { boundary_edges: Vec<(u32, u32)> },

    #[error("{quantity} = {value} is outside the admissible range {range}")]
    Domain {
        quantity: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },
}

pub type Result<T, E = HullError> = std::result::Result<T, E>;
