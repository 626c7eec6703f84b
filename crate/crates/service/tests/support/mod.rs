// Helpers shared by the service integration tests.

#![allow(dead_code)]

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde_json::Value;
use tokio::sync::oneshot;
use wf_service::{ApiError, Client, ClientError, Service, Store};

pub const DIGITALIZATION: &str = include_str!("../../../../workflows/digitalization.wf.json");

/// An in-process server on an ephemeral port, stopped on drop.
pub struct TestServer {
    pub base: String,
    pub svc: Arc<Service>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl TestServer {
    pub fn start(svc: Service) -> TestServer {
        let svc = Arc::new(svc);
        let (stop, stopped) = oneshot::channel::<()>();
        let (ready_tx, ready_rx) = std::sync::mpsc::channel();
        let shared = Arc::clone(&svc);
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                ready_tx.send(listener.local_addr().unwrap()).unwrap();
                wf_service::serve(listener, shared, async {
                    let _ = stopped.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = ready_rx.recv().unwrap();
        TestServer { base: format!("http://{addr}"), svc, stop: Some(stop), thread: Some(thread) }
    }

    pub fn in_memory() -> TestServer {
        TestServer::start(logical())
    }

    pub fn on_disk(dir: &Path) -> TestServer {
        TestServer::start(Service::open(Store::open(dir).unwrap()).unwrap())
    }

    pub fn client(&self) -> Client {
        Client::new(&self.base)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// In-memory service whose clock ticks once per reading.
pub fn logical() -> Service {
    let tick = AtomicU64::new(0);
    Service::in_memory(Box::new(move || tick.fetch_add(1, Ordering::Relaxed) + 1))
}

pub fn rejected<T: std::fmt::Debug>(r: Result<T, ClientError>) -> ApiError {
    match r {
        Err(ClientError::Rejected(e)) => e,
        other => panic!("expected an error response, got {other:?}"),
    }
}

/// Raw request for cases the client cannot express.
pub fn raw(method: &str, url: &str, body: Option<&str>) -> (u16, Value) {
    let req = ureq::request(method, url);
    let r = match body {
        Some(b) => req.set("content-type", "application/json").send_string(b),
        None => req.call(),
    };
    let resp = match r {
        Ok(r) => r,
        Err(ureq::Error::Status(_, r)) => r,
        Err(e) => panic!("transport error: {e}"),
    };
    let status = resp.status();
    let text = resp.into_string().unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::Null))
}

pub fn states(c: &Client, id: &str) -> Vec<(String, String)> {
    let s = c.status(id).unwrap();
    s["activities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["name"].as_str().unwrap().to_owned(), a["state"].as_str().unwrap().to_owned()))
        .collect()
}

pub fn state_of(c: &Client, id: &str, activity: &str) -> String {
    states(c, id).into_iter().find(|(n, _)| n == activity).map(|(_, s)| s).unwrap()
}

/// A `wfd` child process on an ephemeral port, killed on drop.
pub struct Daemon {
    pub base: String,
    pub recovered: usize,
    child: std::process::Child,
}

impl Daemon {
    pub fn spawn(data_dir: &Path) -> Daemon {
        Daemon::try_spawn(data_dir).unwrap_or_else(|(code, err)| panic!("wfd exited with {code:?}: {err}"))
    }

    /// Starts wfd, or returns its exit code and stderr if it refuses to run.
    pub fn try_spawn(data_dir: &Path) -> Result<Daemon, (Option<i32>, String)> {
        use std::io::{BufRead, Read};
        use std::process::{Command, Stdio};
        let mut child = Command::new(env!("CARGO_BIN_EXE_wfd"))
            .args(["--listen", "127.0.0.1:0", "--data-dir"])
            .arg(data_dir)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .expect("wfd starts");
        let mut line = String::new();
        std::io::BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let Some(rest) = line.trim().strip_prefix("wfd listening on ") else {
            let status = child.wait().unwrap();
            let mut err = String::new();
            child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
            return Err((status.code(), err));
        };
        let (base, count) = rest.split_once(" (").unwrap();
        let recovered = count.split_whitespace().next().unwrap().parse().unwrap();
        Ok(Daemon { base: base.to_owned(), recovered, child })
    }

    pub fn client(&self) -> Client {
        Client::new(&self.base)
    }

    /// SIGKILL, no chance to clean up.
    pub fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Daemon {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
