#![allow(dead_code)]

pub mod mock_llm;

use std::path::Path;
use std::time::{Duration, Instant};

use ansatz_forge_cli::runs::RunStore;
use serde_json::Value;

/// Starts the service on an ephemeral port and returns its base URL.
pub fn start_service(runs_dir: &Path) -> String {
    let store = RunStore::open(runs_dir).expect("run dir");
    let listener = std::net::TcpListener::bind("127.0.0.1:0").expect("bind");
    listener.set_nonblocking(true).unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            ansatz_forge_cli::service::serve(listener, store).await.unwrap();
        });
    });
    base
}

pub struct Client {
    agent: ureq::Agent,
    pub base: String,
}

pub struct Reply {
    pub status: u16,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

impl Client {
    pub fn new(base: String) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self { agent, base }
    }

    pub fn get(&self, path: &str) -> Reply {
        let mut resp = self.agent.get(&format!("{}{path}", self.base)).call().expect("GET");
        Reply { status: resp.status().as_u16(), body: resp.body_mut().read_to_string().unwrap() }
    }

    pub fn post(&self, path: &str, body: &Value) -> Reply {
        let mut resp =
            self.agent.post(&format!("{}{path}", self.base)).send_json(body).expect("POST");
        Reply { status: resp.status().as_u16(), body: resp.body_mut().read_to_string().unwrap() }
    }

    /// Polls `GET /runs/{id}` until `done` holds or the deadline passes.
    pub fn wait_for(&self, id: &str, timeout: Duration, done: impl Fn(&Value) -> bool) -> Value {
        let start = Instant::now();
        loop {
            let r = self.get(&format!("/runs/{id}")).json();
            if done(&r) {
                return r;
            }
            assert!(start.elapsed() < timeout, "timed out waiting on run {id}: {r}");
            std::thread::sleep(Duration::from_millis(20));
        }
    }
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

pub fn problem_json(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}
