//! HTTP/JSON front end for one hub.
//!
//! Every mutation goes through a single mutex around the [`Hub`], so
//! concurrent requests are applied one at a time in arrival order. Handlers
//! never read the wall clock: time only moves through the hub's logical clock
//! or an explicit `now` in a recompute request. With a data directory the hub
//! is restored from `hub.json` at start and written back on shutdown.

mod routes;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use genehub_core::hub::{Hub, HubConfig, HubSnapshot};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use routes::router;

/// Snapshot file inside the data directory.
pub const SNAPSHOT_FILE: &str = "hub.json";

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: SocketAddr, source: std::io::Error },
    #[error("invalid server config: {0}")]
    ConfigInvalid(String),
    #[error("persistence failure at {path}: {reason}")]
    Persistence { path: PathBuf, reason: String },
    #[error("server stopped abnormally: {0}")]
    Serve(std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    pub hub: HubConfig,
    pub data_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { addr: SocketAddr::from(([127, 0, 0, 1], 7878)), hub: HubConfig::default(), data_dir: None }
    }
}

/// Shared handle to the served hub.
#[derive(Clone)]
pub struct AppState {
    hub: Arc<Mutex<Hub>>,
    data_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(hub: Hub, data_dir: Option<PathBuf>) -> Self {
        AppState { hub: Arc::new(Mutex::new(hub)), data_dir }
    }

    /// A poisoned lock still guards consistent state: hub operations validate
    /// before mutating, so the inner value is used as is.
    pub fn hub(&self) -> MutexGuard<'_, Hub> {
        self.hub.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Write the current state to the data directory, if one is configured.
    pub fn persist(&self) -> Result<Option<PathBuf>, ServerError> {
        let Some(dir) = &self.data_dir else { return Ok(None) };
        let snapshot = self.hub().snapshot();
        save_snapshot(dir, &snapshot).map(Some)
    }
}

fn persistence(path: &Path, e: impl ToString) -> ServerError {
    ServerError::Persistence { path: path.to_path_buf(), reason: e.to_string() }
}

/// Write atomically through a temporary file in the same directory.
pub fn save_snapshot(dir: &Path, snapshot: &HubSnapshot) -> Result<PathBuf, ServerError> {
    std::fs::create_dir_all(dir).map_err(|e| persistence(dir, e))?;
    let path = dir.join(SNAPSHOT_FILE);
    let tmp = dir.join(format!("{SNAPSHOT_FILE}.tmp"));
    let bytes = serde_json::to_vec(snapshot).map_err(|e| persistence(&path, e))?;
    std::fs::write(&tmp, bytes).map_err(|e| persistence(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| persistence(&path, e))?;
    Ok(path)
}

/// The saved hub in `dir`, or `None` when there is none yet.
pub fn load_snapshot(dir: &Path) -> Result<Option<HubSnapshot>, ServerError> {
    let path = dir.join(SNAPSHOT_FILE);
    match std::fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map(Some).map_err(|e| persistence(&path, e)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(persistence(&path, e)),
    }
}

/// Build the hub a server starts with: the saved one if present, else fresh.
pub fn initial_hub(config: &ServerConfig) -> Result<Hub, ServerError> {
    config.hub.validate().map_err(|e| ServerError::ConfigInvalid(e.to_string()))?;
    if let Some(dir) = &config.data_dir {
        if let Some(snapshot) = load_snapshot(dir)? {
            tracing::info!(path = %dir.join(SNAPSHOT_FILE).display(), "restored hub snapshot");
            return Ok(Hub::restore(snapshot));
        }
    }
    Ok(Hub::new(config.hub.clone()))
}

/// Serve until `shutdown` resolves, then persist.
pub async fn serve(config: ServerConfig, shutdown: impl std::future::Future<Output = ()> + Send + 'static) -> Result<(), ServerError> {
    let state = AppState::new(initial_hub(&config)?, config.data_dir.clone());
    let listener =
        TcpListener::bind(config.addr).await.map_err(|source| ServerError::BindFailure { addr: config.addr, source })?;
    tracing::info!(addr = %listener.local_addr().map_err(ServerError::Serve)?, "hub listening");
    run(listener, state, shutdown).await
}

async fn run(
    listener: TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    axum::serve(listener, router(state.clone())).with_graceful_shutdown(shutdown).await.map_err(ServerError::Serve)?;
    if let Some(path) = state.persist()? {
        tracing::info!(path = %path.display(), "hub snapshot written");
    }
    Ok(())
}

/// A server running on the current tokio runtime.
pub struct RunningServer {
    pub addr: SocketAddr,
    pub state: AppState,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<Result<(), ServerError>>,
}

impl RunningServer {
    /// Bind (port 0 picks a free port) and start serving in the background.
    pub async fn start(config: ServerConfig) -> Result<Self, ServerError> {
        let state = AppState::new(initial_hub(&config)?, config.data_dir.clone());
        let listener =
            TcpListener::bind(config.addr).await.map_err(|source| ServerError::BindFailure { addr: config.addr, source })?;
        let addr = listener.local_addr().map_err(ServerError::Serve)?;
        let (stop, stopped) = oneshot::channel::<()>();
        let task = tokio::spawn(run(listener, state.clone(), async move {
            let _ = stopped.await;
        }));
        Ok(RunningServer { addr, state, stop: Some(stop), task })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stop accepting requests, drain, and persist.
    pub async fn shutdown(mut self) -> Result<(), ServerError> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.task.await {
            Ok(result) => result,
            Err(e) => Err(ServerError::Serve(std::io::Error::other(e))),
        }
    }
}
