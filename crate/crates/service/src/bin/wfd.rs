use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use wf_service::{Service, Store};

/// Workflow engine daemon.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Address to listen on; port 0 picks a free port.
    #[arg(long, default_value = "127.0.0.1:7878")]
    listen: String,
    /// Directory holding definitions and instance logs.
    #[arg(long, default_value = "wf-data")]
    data_dir: PathBuf,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let svc = match Store::open(&args.data_dir).and_then(Service::open) {
        Ok(svc) => Arc::new(svc),
        Err(e) => {
            eprintln!("wfd: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(&args.listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("wfd: cannot listen on {}: {e}", args.listen);
            return ExitCode::from(2);
        }
    };
    let addr = listener.local_addr().expect("bound socket has an address");
    println!("wfd listening on http://{addr} ({} instances recovered)", svc.instance_ids().len());
    let _ = std::io::stdout().flush();
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match wf_service::serve(listener, svc, shutdown).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wfd: {e}");
            ExitCode::from(2)
        }
    }
}
