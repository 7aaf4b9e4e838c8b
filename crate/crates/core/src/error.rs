use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("no intersection: pixel ray does not meet plane z = {plane_height} mm")]
    NoIntersection { plane_height: f64 },
    #[error("annotation clipped: object {object_id} projects partly outside the image")]
    AnnotationClipped { object_id: usize },
    #[error("degenerate polygon")]
    DegeneratePolygon,
    #[error("could not place {count} objects after {attempts} attempts")]
    PlacementFailed { count: usize, attempts: usize },
    #[error("pose ({x:.1}, {y:.1}) mm is outside the workspace")]
    OutsideWorkspace { x: f64, y: f64 },
    #[error("no contact")]
    NoContact,
    #[error("empty point set")]
    EmptyPointSet,
    #[error("class {0} absent from training set")]
    ClassAbsent(usize),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("detector failure: {0}")]
    Detector(String),
    #[error(transparent)]
    Nn(#[from] vistac_nnet::NnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
