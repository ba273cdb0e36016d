use std::net::SocketAddr;
use std::process::ExitCode;

use moonlab_service::{app, AppState, ServiceConfig};

#[tokio::main]
async fn main() -> ExitCode {
    let config = match ServiceConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("moonlab-service: {e}");
            return ExitCode::from(2);
        }
    };
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let state = match AppState::new(config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("moonlab-service: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("moonlab-service: cannot bind {addr}: {e}");
            return ExitCode::from(3);
        }
    };
    eprintln!(
        "moonlab-service {} listening on {addr}, static files from {}",
        moonlab_service::VERSION,
        state.config().static_dir.display()
    );
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match axum::serve(listener, app(state)).with_graceful_shutdown(shutdown).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("moonlab-service: {e}");
            ExitCode::from(3)
        }
    }
}
