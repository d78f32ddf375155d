//! Client for an external encoder process speaking line-delimited JSON.
//!
//! ```text
//! -> {"hello":true}
//! <- {"dim":768,"model_name":"all-mpnet-base-v2"}
//! -> {"seq":1,"texts":["...","..."]}
//! <- {"seq":1,"dim":768,"vectors":[[...],[...]]}
//! <- {"seq":2,"error":"..."}            (failed request)
//! ```
//!
//! Several requests may be in flight at once; responses are matched to
//! requests by `seq`, so the server may answer out of order.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{Shutdown, TcpStream};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use crate::error::{Error, Result};

use super::hash::hash_embed;
use super::vector::EmbeddingVector;

pub const DEFAULT_BATCH_SIZE: usize = 64;

#[derive(Debug, Serialize, Deserialize)]
pub struct Hello {
    pub hello: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HelloReply {
    pub dim: usize,
    pub model_name: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub seq: u64,
    pub texts: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedReply {
    pub seq: u64,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub vectors: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// `host:port`, optionally written `tcp://host:port`.
    Tcp(String),
    /// `exec:COMMAND` spawns COMMAND through `sh -c` and talks over its stdio.
    Exec(String),
}

impl std::str::FromStr for Endpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(cmd) = s.strip_prefix("exec:") {
            if cmd.trim().is_empty() {
                return Err(Error::Config("empty exec: bridge command".into()));
            }
            return Ok(Endpoint::Exec(cmd.to_string()));
        }
        let addr = s.strip_prefix("tcp://").unwrap_or(s);
        if addr.is_empty() || !addr.contains(':') {
            return Err(Error::Config(format!("bridge endpoint {s:?} is not host:port or exec:CMD")));
        }
        Ok(Endpoint::Tcp(addr.to_string()))
    }
}

enum Connection {
    Tcp(TcpStream),
    Child(Child),
}

type Reply = std::result::Result<EmbedReply, String>;

#[derive(Default)]
struct Pending {
    waiters: HashMap<u64, mpsc::Sender<Reply>>,
    closed: Option<String>,
}

pub struct BridgeClient {
    endpoint: String,
    dim: usize,
    model_name: String,
    batch_size: usize,
    next_seq: AtomicU64,
    writer: Mutex<Box<dyn Write + Send>>,
    pending: Arc<Mutex<Pending>>,
    connection: Mutex<Option<Connection>>,
    reader: Option<JoinHandle<()>>,
}

impl std::fmt::Debug for BridgeClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BridgeClient")
            .field("endpoint", &self.endpoint)
            .field("dim", &self.dim)
            .field("model_name", &self.model_name)
            .finish()
    }
}

impl BridgeClient {
    /// Connects and performs the handshake, retrying up to `retries` times
    /// with exponential backoff.
    pub fn connect(endpoint: &str, retries: u32) -> Result<Self> {
        let parsed: Endpoint = endpoint.parse()?;
        let mut last = String::new();
        for attempt in 0..=retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(50 << attempt.min(6)));
            }
            match Self::try_connect(endpoint, &parsed) {
                Ok(client) => return Ok(client),
                Err(e) => {
                    warn!(endpoint, attempt, error = %e, "bridge connection failed");
                    last = e;
                }
            }
        }
        Err(Error::Transport { retries, message: last })
    }

    fn try_connect(endpoint: &str, parsed: &Endpoint) -> std::result::Result<Self, String> {
        let (reader, writer, connection): (Box<dyn BufRead + Send>, Box<dyn Write + Send>, Connection) =
            match parsed {
                Endpoint::Tcp(addr) => {
                    let stream = TcpStream::connect(addr).map_err(|e| format!("connect {addr}: {e}"))?;
                    let _ = stream.set_nodelay(true);
                    let r = stream.try_clone().map_err(|e| e.to_string())?;
                    let w = stream.try_clone().map_err(|e| e.to_string())?;
                    (Box::new(BufReader::new(r)), Box::new(w), Connection::Tcp(stream))
                }
                Endpoint::Exec(cmd) => {
                    let mut child = Command::new("sh")
                        .arg("-c")
                        .arg(cmd)
                        .stdin(Stdio::piped())
                        .stdout(Stdio::piped())
                        .stderr(Stdio::inherit())
                        .spawn()
                        .map_err(|e| format!("spawn {cmd:?}: {e}"))?;
                    let stdin = child.stdin.take().ok_or("child stdin unavailable")?;
                    let stdout = child.stdout.take().ok_or("child stdout unavailable")?;
                    (Box::new(BufReader::new(stdout)), Box::new(stdin), Connection::Child(child))
                }
            };
        let mut reader = reader;
        let mut writer = writer;
        let hello = serde_json::to_string(&Hello { hello: true }).expect("serializable");
        writeln!(writer, "{hello}").and_then(|_| writer.flush()).map_err(|e| format!("handshake write: {e}"))?;
        let mut line = String::new();
        let n = reader.read_line(&mut line).map_err(|e| format!("handshake read: {e}"))?;
        if n == 0 {
            return Err("bridge closed the connection during handshake".into());
        }
        let reply: HelloReply =
            serde_json::from_str(line.trim()).map_err(|e| format!("bad handshake reply {:?}: {e}", line.trim()))?;
        if reply.dim == 0 {
            return Err("bridge reported dim 0".into());
        }
        debug!(endpoint, dim = reply.dim, model = %reply.model_name, "bridge connected");

        let pending = Arc::new(Mutex::new(Pending::default()));
        let reader_pending = Arc::clone(&pending);
        let handle = std::thread::spawn(move || read_replies(reader, reader_pending));
        Ok(BridgeClient {
            endpoint: endpoint.to_string(),
            dim: reply.dim,
            model_name: reply.model_name,
            batch_size: DEFAULT_BATCH_SIZE,
            next_seq: AtomicU64::new(1),
            writer: Mutex::new(writer),
            pending,
            connection: Mutex::new(Some(connection)),
            reader: Some(handle),
        })
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Sends every chunk before waiting on any reply.
    pub fn embed_batch<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<EmbeddingVector>> {
        let mut receivers = Vec::new();
        for chunk in texts.chunks(self.batch_size) {
            let seq = self.next_seq.fetch_add(1, Ordering::Relaxed);
            let (tx, rx) = mpsc::channel();
            {
                let mut pending = self.pending.lock().expect("pending lock");
                if let Some(reason) = &pending.closed {
                    return Err(Error::Transport { retries: 0, message: reason.clone() });
                }
                pending.waiters.insert(seq, tx);
            }
            let request = EmbedRequest {
                seq,
                texts: chunk.iter().map(|t| t.as_ref().to_string()).collect(),
            };
            let line = serde_json::to_string(&request).expect("serializable");
            let mut w = self.writer.lock().expect("writer lock");
            writeln!(w, "{line}")
                .and_then(|_| w.flush())
                .map_err(|e| Error::Transport { retries: 0, message: format!("write seq {seq}: {e}") })?;
            receivers.push((seq, chunk.len(), rx));
        }

        let mut out = Vec::with_capacity(texts.len());
        for (seq, expected, rx) in receivers {
            let reply = rx
                .recv()
                .map_err(|_| Error::Transport { retries: 0, message: format!("reader gone before seq {seq}") })?
                .map_err(|message| Error::Transport { retries: 0, message })?;
            if let Some(err) = reply.error {
                return Err(Error::Protocol(format!("bridge rejected seq {seq}: {err}")));
            }
            let vectors = reply
                .vectors
                .ok_or_else(|| Error::Protocol(format!("reply to seq {seq} has no vectors")))?;
            if reply.dim.is_some_and(|d| d != self.dim) {
                return Err(Error::Protocol(format!(
                    "seq {seq}: reply dim {:?} differs from handshake dim {}",
                    reply.dim, self.dim
                )));
            }
            if vectors.len() != expected {
                return Err(Error::Protocol(format!(
                    "seq {seq}: expected {expected} vectors, got {}",
                    vectors.len()
                )));
            }
            for v in vectors {
                if v.len() != self.dim {
                    return Err(Error::Protocol(format!(
                        "seq {seq}: vector of dim {} but handshake dim {}",
                        v.len(),
                        self.dim
                    )));
                }
                out.push(EmbeddingVector::new(v).map_err(|e| Error::Protocol(e.to_string()))?);
            }
        }
        Ok(out)
    }
}

fn read_replies(mut reader: Box<dyn BufRead + Send>, pending: Arc<Mutex<Pending>>) {
    let mut line = String::new();
    let reason = loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) => break "bridge closed the connection".to_string(),
            Err(e) => break format!("bridge read failed: {e}"),
            Ok(_) => {}
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match serde_json::from_str::<EmbedReply>(trimmed) {
            Ok(reply) => {
                let waiter = pending.lock().expect("pending lock").waiters.remove(&reply.seq);
                match waiter {
                    Some(tx) => {
                        let _ = tx.send(Ok(reply));
                    }
                    None => warn!(seq = reply.seq, "reply for unknown seq"),
                }
            }
            Err(e) => break format!("unparseable bridge reply: {e}"),
        }
    };
    let mut p = pending.lock().expect("pending lock");
    for (_, tx) in p.waiters.drain() {
        let _ = tx.send(Err(reason.clone()));
    }
    p.closed = Some(reason);
}

impl Drop for BridgeClient {
    fn drop(&mut self) {
        if let Ok(mut conn) = self.connection.lock() {
            match conn.take() {
                Some(Connection::Tcp(s)) => {
                    let _ = s.shutdown(Shutdown::Both);
                }
                Some(Connection::Child(mut child)) => {
                    // closing stdin lets a well-behaved server exit on its own
                    if let Ok(mut w) = self.writer.lock() {
                        *w = Box::new(std::io::sink());
                    }
                    let _ = child.kill();
                    let _ = child.wait();
                }
                None => {}
            }
        }
        if let Some(h) = self.reader.take() {
            let _ = h.join();
        }
    }
}

/// Reference server for the wire protocol backed by the hash encoder.
/// Serves until `input` reaches EOF. Malformed requests get an error reply
/// carrying the offending seq (0 when it cannot be recovered).
pub fn serve_hash_bridge(input: impl BufRead, mut output: impl Write, dim: usize) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(trimmed) {
            Ok(v) => v,
            Err(e) => {
                let reply = EmbedReply { seq: 0, dim: None, vectors: None, error: Some(e.to_string()) };
                writeln!(output, "{}", serde_json::to_string(&reply)?)?;
                output.flush()?;
                continue;
            }
        };
        let reply = if value.get("hello").is_some() {
            serde_json::to_string(&HelloReply { dim, model_name: format!("hash-stub-{dim}") })?
        } else {
            let reply = match serde_json::from_value::<EmbedRequest>(value.clone()) {
                Ok(req) => match req.texts.iter().map(|t| hash_embed(t, dim)).collect::<Result<Vec<_>>>() {
                    Ok(vs) => EmbedReply {
                        seq: req.seq,
                        dim: Some(dim),
                        vectors: Some(vs.into_iter().map(EmbeddingVector::into_inner).collect()),
                        error: None,
                    },
                    Err(e) => EmbedReply { seq: req.seq, dim: None, vectors: None, error: Some(e.to_string()) },
                },
                Err(e) => EmbedReply {
                    seq: value.get("seq").and_then(|s| s.as_u64()).unwrap_or(0),
                    dim: None,
                    vectors: None,
                    error: Some(e.to_string()),
                },
            };
            serde_json::to_string(&reply)?
        };
        writeln!(output, "{reply}")?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::net::TcpListener;

    fn spawn_server(dim: usize) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        std::thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                std::thread::spawn(move || {
                    let r = BufReader::new(stream.try_clone().unwrap());
                    let _ = serve_hash_bridge(r, stream, dim);
                });
            }
        });
        addr
    }

    #[test]
    fn endpoint_parsing() {
        assert_eq!("tcp://127.0.0.1:9".parse::<Endpoint>().unwrap(), Endpoint::Tcp("127.0.0.1:9".into()));
        assert_eq!("localhost:9".parse::<Endpoint>().unwrap(), Endpoint::Tcp("localhost:9".into()));
        assert_eq!("exec:python3 s.py".parse::<Endpoint>().unwrap(), Endpoint::Exec("python3 s.py".into()));
        assert!("nonsense".parse::<Endpoint>().is_err());
    }

    #[test]
    fn tcp_round_trip_matches_hash_encoder() {
        let addr = spawn_server(32);
        let client = BridgeClient::connect(&addr, 2).unwrap().with_batch_size(2);
        assert_eq!(client.dim(), 32);
        let texts = ["a [M] x [\\M]", "b", "c", "a [M] x [\\M]", "e"];
        let vs = client.embed_batch(&texts).unwrap();
        assert_eq!(vs.len(), 5);
        for (t, v) in texts.iter().zip(&vs) {
            assert_eq!(v, &hash_embed(t, 32).unwrap());
        }
        assert_eq!(vs[0], vs[3]);
    }

    #[test]
    fn concurrent_callers_get_their_own_vectors() {
        let addr = spawn_server(16);
        let client = Arc::new(BridgeClient::connect(&addr, 0).unwrap().with_batch_size(3));
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let c = Arc::clone(&client);
                std::thread::spawn(move || {
                    let texts: Vec<String> = (0..10).map(|j| format!("thread {i} text {j}")).collect();
                    let vs = c.embed_batch(&texts).unwrap();
                    for (t, v) in texts.iter().zip(vs) {
                        assert_eq!(v, hash_embed(t, 16).unwrap());
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }

    #[test]
    fn unreachable_reports_retries() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        drop(listener);
        match BridgeClient::connect(&addr, 2) {
            Err(Error::Transport { retries, .. }) => assert_eq!(retries, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_protocol_error() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut w = stream.try_clone().unwrap();
            let mut r = BufReader::new(stream);
            let mut line = String::new();
            r.read_line(&mut line).unwrap();
            writeln!(w, r#"{{"dim":4,"model_name":"liar"}}"#).unwrap();
            line.clear();
            r.read_line(&mut line).unwrap();
            let req: EmbedRequest = serde_json::from_str(&line).unwrap();
            writeln!(w, r#"{{"seq":{},"dim":4,"vectors":[[1.0,0.0,0.0]]}}"#, req.seq).unwrap();
            // keep the socket open until the client has read the reply
            line.clear();
            let _ = r.read_line(&mut line);
        });
        let client = BridgeClient::connect(&addr, 0).unwrap();
        assert!(matches!(client.embed_batch(&["x"]), Err(Error::Protocol(_))));
    }

    #[test]
    fn server_reports_malformed_request_seq() {
        let input = "{\"hello\":true}\n{\"seq\":7,\"texts\":\"oops\"}\n";
        let mut out = Vec::new();
        serve_hash_bridge(input.as_bytes(), &mut out, 8).unwrap();
        let lines: Vec<&str> = std::str::from_utf8(&out).unwrap().lines().collect();
        let hello: HelloReply = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(hello.dim, 8);
        let err: EmbedReply = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(err.seq, 7);
        assert!(err.error.is_some());
    }
}
