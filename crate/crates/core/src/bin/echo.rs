//! Reference persistence endpoint for the interop protocol.
//!
//! Serves standard input/output by default or TCP with `--tcp ADDR`. The
//! `--mode` flag selects deliberately broken behaviours used in tests.

use std::io::{self, BufReader};
use std::net::TcpListener;

use clap::Parser;
use cfbench::interop::{serve, serve_tcp, EchoMode};

#[derive(Parser)]
#[command(name = "cfbench-echo", version, about = "Persistence forecaster speaking the cfbench protocol")]
struct Args {
    /// Listen on this address instead of standard streams.
    #[arg(long)]
    tcp: Option<String>,
    /// echo, garbage, silent, wrong-id, ragged or slow-first:<ms>.
    #[arg(long, default_value = "echo")]
    mode: EchoMode,
}

fn main() {
    let args = Args::parse();
    let res = match &args.tcp {
        Some(addr) => TcpListener::bind(addr).and_then(|l| {
            eprintln!("cfbench-echo listening on {}", l.local_addr()?);
            serve_tcp(l, args.mode)
        }),
        None => serve(BufReader::new(io::stdin().lock()), io::stdout().lock(), args.mode),
    };
    if let Err(e) = res {
        eprintln!("cfbench-echo: {e}");
        std::process::exit(1);
    }
}
