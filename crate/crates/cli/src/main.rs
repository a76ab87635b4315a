mod args;
mod failure;
mod manifest;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, ReplayArgs};
use failure::Failure;
use manifest::{digests, RunManifest};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(stdout) => {
            let mut out = std::io::stdout().lock();
            if out
                .write_all(stdout.as_bytes())
                .and_then(|()| out.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<String, Failure> {
    let mut command = cli.command;
    if let Command::Replay(a) = &command {
        return replay(a);
    }
    command.absolutize();
    let stdout = run::execute(&command)?;
    let outputs = command.outputs();
    if !cli.no_manifest {
        let path = match (&cli.manifest, outputs.first()) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(first)) => Some(manifest::default_path(first)),
            (None, None) => None,
        };
        if let Some(path) = path {
            let argv = std::env::args().collect();
            RunManifest::new(&command, argv, cli.seed)?.write(&path)?;
        }
    }
    Ok(stdout)
}

fn replay(a: &ReplayArgs) -> Result<String, Failure> {
    let recorded = RunManifest::read(&a.manifest_path)?;
    if recorded.tool != manifest::TOOL {
        return Err(Failure::input(format!(
            "manifest was written by {:?}",
            recorded.tool
        )));
    }
    let changed: Vec<String> = recorded
        .inputs
        .iter()
        .filter(|f| manifest::sha256_file(&f.path).map_or(true, |h| h != f.sha256))
        .map(|f| f.path.display().to_string())
        .collect();
    if !changed.is_empty() {
        return Err(Failure::consistency(format!(
            "inputs differ from the manifest: {}",
            changed.join(", ")
        )));
    }
    let mut command = recorded.command.clone();
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::internal(format!("cannot create {}: {e}", dir.display())))?;
        let dir = std::path::absolute(dir).map_err(|e| Failure::internal(e.to_string()))?;
        command.redirect_outputs(&dir);
    }
    let stdout = run::execute(&command)?;
    let fresh = digests(&command.outputs())?;
    let mut report = String::new();
    let mut differing = Vec::new();
    for (old, new) in recorded.outputs.iter().zip(&fresh) {
        let same = old.sha256 == new.sha256;
        report.push_str(&format!(
            "{} {}\n",
            if same { "identical" } else { "DIFFERENT" },
            new.path.display()
        ));
        if !same {
            differing.push(new.path.display().to_string());
        }
    }
    if recorded.outputs.len() != fresh.len() {
        differing.push("output count".into());
    }
    if !differing.is_empty() {
        return Err(Failure::consistency(format!(
            "replay did not reproduce: {}",
            differing.join(", ")
        )));
    }
    Ok(format!("{stdout}{report}"))
}
