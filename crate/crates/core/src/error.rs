use crate::cv::CvError;
use crate::data::DataError;
use crate::gram::GramError;
use crate::kernels::KernelError;
use crate::spdag::SpDagError;
use crate::svm::SvmError;
use crate::wl::WlError;

/// Process exit codes of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Ok = 0,
    Config = 2,
    Data = 3,
    Compute = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Wl(#[from] WlError),
    #[error(transparent)]
    Cv(#[from] CvError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    SpDag(#[from] SpDagError),
    #[error("{}: {source}", path.display())]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Error::Config(_) => ExitCode::Config,
            Error::Data(_) | Error::Io { .. } => ExitCode::Data,
            Error::Gram(GramError::Io { .. } | GramError::Parse { .. } | GramError::Json { .. }) => ExitCode::Data,
            Error::Gram(_) | Error::Kernel(_) | Error::Wl(_) | Error::Cv(_) | Error::Svm(_) => ExitCode::Compute,
            Error::SpDag(SpDagError::RootOutOfRange { .. }) => ExitCode::Config,
            Error::SpDag(_) => ExitCode::Compute,
        }
    }
}
