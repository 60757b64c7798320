use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Bad configuration or arguments; nothing has run.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: bitext_core::Error,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Stage { .. } => 2,
        }
    }

    pub fn stage(stage: &'static str) -> impl FnOnce(bitext_core::Error) -> PipelineError {
        move |source| PipelineError::Stage { stage, source }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;
