use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::protocol::{decode, encode, excerpt, Message, WireRequest, PROTOCOL_VERSION};
use crate::forecast::{Forecast, ForecastRequest, Forecaster};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Transport {
    /// Spawn a child process and talk over its standard streams.
    Process { program: String, #[serde(default)] args: Vec<String> },
    Tcp { addr: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdapterEndpoint {
    pub transport: Transport,
    pub timeout: Duration,
    pub label: String,
}

impl AdapterEndpoint {
    pub fn process(program: impl Into<String>, args: &[&str], label: impl Into<String>) -> Self {
        AdapterEndpoint {
            transport: Transport::Process { program: program.into(), args: args.iter().map(|s| s.to_string()).collect() },
            timeout: Duration::from_secs(10),
            label: label.into(),
        }
    }

    pub fn tcp(addr: impl Into<String>, label: impl Into<String>) -> Self {
        AdapterEndpoint { transport: Transport::Tcp { addr: addr.into() }, timeout: Duration::from_secs(10), label: label.into() }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::Config(format!("adapter `{}` needs a positive timeout", self.label)));
        }
        if self.label.trim().is_empty() {
            return Err(Error::Config("adapter label must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnhealthyReason {
    Timeout,
    Protocol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HealthStatus {
    Healthy,
    Unhealthy { reason: UnhealthyReason, detail: String },
}

impl HealthStatus {
    pub fn is_healthy(&self) -> bool {
        matches!(self, HealthStatus::Healthy)
    }
}

enum Incoming {
    Line(String),
    Closed,
}

/// One live request/response channel to an endpoint.
pub struct Connection {
    writer: Box<dyn Write + Send>,
    rx: Receiver<Incoming>,
    child: Option<Child>,
    timeout: Duration,
    next_id: u64,
    abandoned: HashSet<u64>,
    closed: bool,
}

impl Connection {
    pub fn open(ep: &AdapterEndpoint) -> Result<Connection> {
        ep.validate()?;
        let (tx, rx) = mpsc::channel();
        let (writer, reader, child): (Box<dyn Write + Send>, Box<dyn BufRead + Send>, Option<Child>) = match &ep.transport {
            Transport::Process { program, args } => {
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| Error::Unavailable(format!("cannot start `{program}`: {e}")))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                (Box::new(stdin), Box::new(BufReader::new(stdout)), Some(child))
            }
            Transport::Tcp { addr } => {
                let sock = addr
                    .to_socket_addrs()
                    .map_err(|e| Error::Unavailable(format!("cannot resolve {addr}: {e}")))?
                    .next()
                    .ok_or_else(|| Error::Unavailable(format!("no address for {addr}")))?;
                let stream = TcpStream::connect_timeout(&sock, ep.timeout)
                    .map_err(|e| Error::Unavailable(format!("cannot connect to {addr}: {e}")))?;
                stream.set_nodelay(true).ok();
                let read_half = stream.try_clone()?;
                (Box::new(stream), Box::new(BufReader::new(read_half)), None)
            }
        };
        thread::spawn(move || {
            for line in reader.lines() {
                match line {
                    Ok(l) if l.trim().is_empty() => continue,
                    Ok(l) => {
                        if tx.send(Incoming::Line(l)).is_err() {
                            return;
                        }
                    }
                    Err(_) => break,
                }
            }
            let _ = tx.send(Incoming::Closed);
        });
        Ok(Connection { writer, rx, child, timeout: ep.timeout, next_id: 1, abandoned: HashSet::new(), closed: false })
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    fn send(&mut self, msg: &Message) -> Result<()> {
        let line = encode(msg)?;
        let res = writeln!(self.writer, "{line}").and_then(|_| self.writer.flush());
        res.map_err(|e| {
            self.closed = true;
            Error::Unavailable(format!("endpoint closed its input: {e}"))
        })
    }

    /// Next decoded line before `deadline`; `Ok(None)` on timeout.
    fn recv_until(&mut self, deadline: Instant) -> Result<Option<Message>> {
        let wait = deadline.saturating_duration_since(Instant::now());
        match self.rx.recv_timeout(wait) {
            Ok(Incoming::Line(l)) => decode(&l).map(Some),
            Ok(Incoming::Closed) | Err(RecvTimeoutError::Disconnected) => {
                self.closed = true;
                Err(Error::Unavailable("endpoint closed its output".into()))
            }
            Err(RecvTimeoutError::Timeout) => Ok(None),
        }
    }

    pub fn ping(&mut self) -> HealthStatus {
        let unhealthy = |reason, detail: String| HealthStatus::Unhealthy { reason, detail };
        if let Err(e) = self.send(&Message::Ping) {
            return unhealthy(UnhealthyReason::Timeout, e.to_string());
        }
        let deadline = Instant::now() + self.timeout;
        loop {
            match self.recv_until(deadline) {
                Ok(Some(Message::Pong { proto: PROTOCOL_VERSION })) => return HealthStatus::Healthy,
                Ok(Some(Message::ForecastResult(r))) if self.abandoned.remove(&r.id) => continue,
                Ok(Some(other)) => return unhealthy(UnhealthyReason::Protocol, format!("expected pong, got {other:?}")),
                Ok(None) => return unhealthy(UnhealthyReason::Timeout, "no pong before the timeout".into()),
                Err(Error::Protocol(m)) => return unhealthy(UnhealthyReason::Protocol, m),
                Err(e) => return unhealthy(UnhealthyReason::Timeout, e.to_string()),
            }
        }
    }

    /// Sends `msg` (a forecast request carrying `id`) and waits for the
    /// matching reply, skipping replies to abandoned requests.
    fn exchange(&mut self, req: &WireRequest) -> Result<Option<Message>> {
        self.send(&Message::Forecast(req.clone()))?;
        let deadline = Instant::now() + self.timeout;
        loop {
            let Some(msg) = self.recv_until(deadline)? else {
                self.abandoned.insert(req.id);
                return Ok(None);
            };
            let id = match &msg {
                Message::ForecastResult(r) => Some(r.id),
                Message::Error(e) => e.id,
                _ => None,
            };
            match id {
                Some(i) if i == req.id => return Ok(Some(msg)),
                Some(i) if self.abandoned.remove(&i) => continue,
                _ => {
                    return Err(Error::Protocol(format!(
                        "expected reply to request {}, got `{}`",
                        req.id,
                        excerpt(&encode(&msg).unwrap_or_default())
                    )))
                }
            }
        }
    }

    /// Raw request/response with one retry on timeout. The id fields are
    /// assigned here.
    pub fn request(&mut self, mut req: WireRequest) -> Result<Message> {
        for _attempt in 0..2 {
            req.id = self.next_id;
            self.next_id += 1;
            if let Some(msg) = self.exchange(&req)? {
                return Ok(msg);
            }
        }
        Err(Error::Unavailable(format!("no reply within {:?} after one retry", self.timeout)))
    }

    pub fn forecast(&mut self, req: &ForecastRequest) -> Result<Forecast> {
        req.validate()?;
        let wire = WireRequest {
            id: 0,
            context: req.context.clone(),
            horizon: req.horizon,
            n_samples: req.n_samples,
            covariates: None,
            params: Some(serde_json::Map::from_iter([("seed".to_string(), serde_json::Value::from(req.seed))])),
        };
        match self.request(wire)? {
            Message::ForecastResult(r) => {
                let raw = || excerpt(&serde_json::to_string(&r.samples).unwrap_or_default());
                if r.samples.len() != req.n_samples || r.samples.iter().any(|p| p.len() != req.horizon) {
                    return Err(Error::Protocol(format!(
                        "expected {}x{} samples, got `{}`",
                        req.n_samples,
                        req.horizon,
                        raw()
                    )));
                }
                Forecast::from_samples(r.samples)
            }
            Message::Error(e) => Err(Error::Remote { code: e.code, message: e.message }),
            other => Err(Error::Protocol(format!("unexpected reply `{}`", excerpt(&encode(&other).unwrap_or_default())))),
        }
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Opens a connection and pings it.
pub fn health_check(ep: &AdapterEndpoint) -> HealthStatus {
    match Connection::open(ep) {
        Ok(mut c) => c.ping(),
        Err(e) => HealthStatus::Unhealthy { reason: UnhealthyReason::Timeout, detail: e.to_string() },
    }
}

/// Forecaster backed by a pool of connections to one endpoint; each
/// concurrent caller gets its own connection.
pub struct RemoteForecaster {
    endpoint: AdapterEndpoint,
    pool: Mutex<Vec<Connection>>,
}

impl RemoteForecaster {
    pub fn new(endpoint: AdapterEndpoint) -> Result<Self> {
        endpoint.validate()?;
        Ok(RemoteForecaster { endpoint, pool: Mutex::new(Vec::new()) })
    }

    pub fn endpoint(&self) -> &AdapterEndpoint {
        &self.endpoint
    }
}

impl Forecaster for RemoteForecaster {
    fn name(&self) -> &str {
        &self.endpoint.label
    }

    fn forecast(&self, req: &ForecastRequest) -> Result<Forecast> {
        let pooled = self.pool.lock().expect("pool lock").pop();
        let mut conn = match pooled {
            Some(c) => c,
            None => Connection::open(&self.endpoint)?,
        };
        let out = conn.forecast(req);
        // Connections that hit transport or protocol trouble are discarded.
        let reusable = !conn.is_closed() && matches!(&out, Ok(_) | Err(Error::Remote { .. }) | Err(Error::Domain(_)));
        if reusable {
            self.pool.lock().expect("pool lock").push(conn);
        }
        out
    }
}
