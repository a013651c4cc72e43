use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use super::protocol::{decode, encode, Message, WireError, WireRequest, WireResult, PROTOCOL_VERSION};

/// Behaviour of the reference endpoint. Everything except `Echo` is a
/// deliberately broken peer for exercising client error handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EchoMode {
    /// Persistence forecasts: every path repeats the last context value.
    Echo,
    /// Answers every line with non-JSON text.
    Garbage,
    /// Reads requests and never answers.
    Silent,
    /// Answers forecasts with an id that was never sent.
    WrongId,
    /// Answers forecasts with rows of unequal length.
    Ragged,
    /// Delays the first forecast reply by the given duration.
    SlowFirst(Duration),
}

impl std::str::FromStr for EchoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "echo" => Ok(EchoMode::Echo),
            "garbage" => Ok(EchoMode::Garbage),
            "silent" => Ok(EchoMode::Silent),
            "wrong-id" => Ok(EchoMode::WrongId),
            "ragged" => Ok(EchoMode::Ragged),
            other => match other.strip_prefix("slow-first:").and_then(|ms| ms.parse::<u64>().ok()) {
                Some(ms) => Ok(EchoMode::SlowFirst(Duration::from_millis(ms))),
                None => Err(format!("unknown mode `{other}`")),
            },
        }
    }
}

fn bad_request(id: Option<u64>, message: impl Into<String>) -> Message {
    Message::Error(WireError { id, code: "bad_request".into(), message: message.into() })
}

fn persistence_reply(req: &WireRequest) -> Message {
    if req.horizon == 0 || req.n_samples == 0 {
        return bad_request(Some(req.id), "horizon and n_samples must be at least 1");
    }
    let Some(&last) = req.context.last() else {
        return bad_request(Some(req.id), "empty context");
    };
    Message::ForecastResult(WireResult { id: req.id, samples: vec![vec![last; req.horizon]; req.n_samples] })
}

/// Answers one request per input line until EOF, flushing after each reply.
pub fn serve<R: BufRead, W: Write>(reader: R, mut writer: W, mode: EchoMode) -> io::Result<()> {
    let mut delayed = false;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match (mode, decode(&line)) {
            (EchoMode::Silent, _) => continue,
            (EchoMode::Garbage, _) => {
                writeln!(writer, "%% this is not json %%")?;
                writer.flush()?;
                continue;
            }
            (_, Ok(Message::Ping)) => Message::Pong { proto: PROTOCOL_VERSION },
            (EchoMode::WrongId, Ok(Message::Forecast(req))) => {
                Message::ForecastResult(WireResult { id: req.id.wrapping_add(1000), samples: vec![vec![0.0; req.horizon]; req.n_samples] })
            }
            (EchoMode::Ragged, Ok(Message::Forecast(req))) => {
                let mut samples = vec![vec![0.0; req.horizon.max(1)]; req.n_samples.max(2)];
                samples[1].push(0.0);
                Message::ForecastResult(WireResult { id: req.id, samples })
            }
            (EchoMode::SlowFirst(d), Ok(Message::Forecast(req))) => {
                if !delayed {
                    delayed = true;
                    thread::sleep(d);
                }
                persistence_reply(&req)
            }
            (_, Ok(Message::Forecast(req))) => persistence_reply(&req),
            (_, Ok(other)) => bad_request(None, format!("unexpected message {other:?}")),
            (_, Err(e)) => bad_request(None, e.to_string()),
        };
        let out = encode(&reply).unwrap_or_else(|e| encode(&bad_request(None, e.to_string())).expect("plain error encodes"));
        writeln!(writer, "{out}")?;
        writer.flush()?;
    }
    Ok(())
}

/// Reference persistence endpoint over arbitrary streams.
pub fn serve_echo<R: BufRead, W: Write>(reader: R, writer: W) -> io::Result<()> {
    serve(reader, writer, EchoMode::Echo)
}

/// Accepts TCP connections forever, one thread per connection.
pub fn serve_tcp(listener: TcpListener, mode: EchoMode) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        thread::spawn(move || {
            let Ok(read_half) = stream.try_clone() else { return };
            if let Err(e) = serve(BufReader::new(read_half), stream, mode) {
                log::debug!("connection ended: {e}");
            }
        });
    }
    Ok(())
}
