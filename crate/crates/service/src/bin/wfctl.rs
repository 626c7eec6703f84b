use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use wf_service::{Client, ClientError};

/// Operator CLI for a running wfd.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Base URL of the service.
    #[arg(long, global = true, env = "WF_SERVER", default_value = "http://127.0.0.1:7878")]
    server: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upload a definition file.
    Load {
        file: PathBuf,
    },
    /// Create an instance of a loaded definition and print its id.
    New {
        definition: String,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        no_anticipation: bool,
    },
    /// Per-activity states and counters.
    Status {
        id: String,
    },
    Worklist {
        id: String,
        #[arg(long)]
        actor: Option<String>,
    },
    Start {
        id: String,
        activity: String,
        #[arg(long)]
        actor: Option<String>,
    },
    Terminate {
        id: String,
        activity: String,
        /// Output record as a JSON object.
        #[arg(long, default_value = "{}")]
        data: String,
    },
    /// Send a provisional record along a data edge.
    Emit {
        id: String,
        activity: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        feedback: bool,
        #[arg(long)]
        data: String,
    },
    Cancel {
        id: String,
        activity: String,
    },
    /// Decoded inputs of an activity.
    Inputs {
        id: String,
        activity: String,
    },
    /// Print the event log, one JSON event per line.
    Events {
        id: String,
        #[arg(long, default_value_t = 0)]
        from: u64,
        /// Keep streaming new events.
        #[arg(long)]
        follow: bool,
    },
    /// Run a scenario against a fresh in-process engine.
    RunScript {
        file: PathBuf,
        /// Also write the produced event log (without timestamps) here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

enum Failure {
    Rejected(String),
    Usage(String),
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Failure {
        match e {
            ClientError::Rejected(api) => Failure::Rejected(format!("{} {}: {}", api.status, api.code, api.message)),
            ClientError::Transport(t) => Failure::Usage(t),
        }
    }
}

fn record(data: &str) -> Result<Value, Failure> {
    match serde_json::from_str::<Value>(data) {
        Ok(v @ Value::Object(_)) => Ok(v),
        Ok(_) => Err(Failure::Usage("--data must be a JSON object".into())),
        Err(e) => Err(Failure::Usage(format!("--data is not JSON: {e}"))),
    }
}

fn show(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = Client::new(&cli.server);
    match cli.command {
        Command::Load { file } => {
            let text =
                std::fs::read_to_string(&file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            show(&c.load_definition(&text)?);
        }
        Command::New { definition, id, no_anticipation } => {
            println!("{}", c.create_instance(&definition, id.as_deref(), !no_anticipation)?);
        }
        Command::Status { id } => show(&c.status(&id)?),
        Command::Worklist { id, actor } => show(&c.worklist(&id, actor.as_deref())?),
        Command::Start { id, activity, actor } => {
            let body = actor.map_or(json!({}), |a| json!({ "actor": a }));
            print_events(&c.act(&id, &activity, "start", &body)?);
        }
        Command::Terminate { id, activity, data } => {
            print_events(&c.act(&id, &activity, "terminate", &json!({ "output": record(&data)? }))?);
        }
        Command::Emit { id, activity, to, feedback, data } => {
            let body = json!({ "edge": { "to": to, "feedback": feedback }, "record": record(&data)? });
            print_events(&c.act(&id, &activity, "emit", &body)?);
        }
        Command::Cancel { id, activity } => print_events(&c.act(&id, &activity, "cancel", &json!({}))?),
        Command::Inputs { id, activity } => show(&c.inputs(&id, &activity)?),
        Command::Events { id, from, follow } => {
            c.events(&id, from, follow, |ev| {
                println!("{}", serde_json::to_string(&ev).expect("events serialize"));
                true
            })?;
        }
        Command::RunScript { file, log } => {
            let t = wf_service::run_script(&file).map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(path) = log {
                let lines: String = t.events.iter().map(|e| format!("{e}\n")).collect();
                std::fs::write(&path, lines).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            }
            println!("{t}");
            if let Some(m) = t.mismatch {
                return Err(Failure::Rejected(m.to_string()));
            }
        }
    }
    Ok(())
}

fn print_events(events: &[wf_core::engine::EngineEvent]) {
    for ev in events {
        println!("{}", serde_json::to_string(ev).expect("events serialize"));
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            eprintln!("wfctl: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("wfctl: {msg}");
            ExitCode::from(2)
        }
    }
}
