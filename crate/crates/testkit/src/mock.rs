//! In-process HTTP server standing in for a remote policy or scorer.

use std::collections::BTreeMap;
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use serde_json::Value;
use tiny_http::{Header, Response, Server};

/// `(path, body, n)` -> `(status, reply)`, where `n` counts earlier calls
/// to the same path.
pub type Handler = dyn Fn(&str, &Value, usize) -> (u16, Value) + Send + Sync;

pub struct MockServer {
    pub url: String,
    server: Arc<Server>,
    log: Arc<Mutex<Vec<(String, Value)>>>,
    worker: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(handler: impl Fn(&str, &Value, usize) -> (u16, Value) + Send + Sync + 'static) -> MockServer {
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind mock server"));
        let url = format!("http://{}", server.server_addr().to_ip().expect("ip listener"));
        let log: Arc<Mutex<Vec<(String, Value)>>> = Arc::default();
        let handler: Arc<Handler> = Arc::new(handler);
        let worker = {
            let (server, log) = (server.clone(), log.clone());
            let counts: Arc<Mutex<BTreeMap<String, usize>>> = Arc::default();
            thread::spawn(move || {
                let mut handles = Vec::new();
                for mut request in server.incoming_requests() {
                    let (log, handler, counts) = (log.clone(), handler.clone(), counts.clone());
                    handles.push(thread::spawn(move || {
                        let mut body = String::new();
                        let _ = request.as_reader().read_to_string(&mut body);
                        let body: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
                        let path = request.url().to_string();
                        let n = {
                            let mut c = counts.lock().unwrap();
                            let e = c.entry(path.clone()).or_default();
                            *e += 1;
                            *e - 1
                        };
                        log.lock().unwrap().push((path.clone(), body.clone()));
                        let (status, reply) = handler(&path, &body, n);
                        let header = Header::from_bytes("Content-Type", "application/json").unwrap();
                        let response = Response::from_string(reply.to_string()).with_status_code(status).with_header(header);
                        let _ = request.respond(response);
                    }));
                }
                for h in handles {
                    let _ = h.join();
                }
            })
        };
        MockServer {
            url,
            server,
            log,
            worker: Some(worker),
        }
    }

    /// Answers every `/act` with `program`.
    pub fn fixed_program(program: &str) -> MockServer {
        let reply = serde_json::json!({ "action_text": program });
        Self::start(move |_, _, _| (200, reply.clone()))
    }

    /// Requests received so far, in arrival order.
    pub fn requests(&self) -> Vec<(String, Value)> {
        self.log.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

/// A local URL nothing is listening on.
pub fn unreachable_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().expect("addr");
    drop(listener);
    format!("http://{addr}")
}
