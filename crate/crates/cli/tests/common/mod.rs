#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

/// Documented commands with stored outputs: (file name, arguments).
pub const GOLDEN: &[(&str, &[&str])] = &[
    ("map_eval.json", &["map", "eval", "--q", "3/4", "--target", "reals-capped", "--k", "8", "--format", "json"]),
    ("map_preimage.json", &["map", "preimage", "--y", "-7/3", "--k", "10"]),
    ("map_audit_balls.csv", &["map", "audit-balls", "--depth", "3", "--bound", "24", "--format", "csv"]),
    ("scheme_audit.json", &["scheme", "audit", "--depth", "3", "--bound", "4", "--neighbourhoods"]),
    ("scheme_audit_baire.csv", &["scheme", "audit", "--rule", "baire", "--depth", "3", "--bound", "4", "--format", "csv"]),
    ("scheme_address.csv", &["scheme", "address", "--q", "-3/7", "--depth", "6", "--format", "csv"]),
    ("game_play.json", &["game", "play", "--kind", "strong", "--space", "sorgenfrey", "--pi", "random:7", "--pii", "lemma13", "--rounds", "20"]),
    ("game_play_euclid.csv", &["game", "play", "--kind", "choquet", "--space", "euclid", "--pi", "greedy", "--pii", "completeness", "--rounds", "10", "--format", "csv"]),
    ("game_audit.csv", &["game", "audit", "--kind", "strict", "--space", "euclid", "--pi", "random:0", "--pii", "strict:completeness", "--rounds", "25", "--seeds", "10", "--format", "csv"]),
    ("fiber_amplify.json", &["fiber", "amplify", "--depth", "2"]),
    ("fiber_verify.csv", &["fiber", "verify", "--depth", "3", "--format", "csv"]),
    ("cb_analyze.json", &["cb", "analyze", "--ordinal", "w^2+1"]),
    ("cb_analyze_omega_plus_one.csv", &["cb", "analyze", "--ordinal", "w+1", "--format", "csv"]),
    ("cb_build_map.json", &["cb", "build-map", "--ordinal", "w^2+1", "--expand", "2", "--children", "2"]),
    ("cb_eval_map.csv", &["cb", "eval-map", "--ordinal", "w+1", "--q", "0,3/4,1/5", "--y", "w;3", "--format", "csv"]),
    ("cb_verify_map.csv", &["cb", "verify-map", "--ordinal", "w^2+1", "--samples", "200", "--bound", "10", "--format", "csv"]),
    ("cantor_scheme.csv", &["cantor", "scheme", "--depth", "3", "--format", "csv"]),
];

pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

pub fn lusin(args: &[&str]) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_lusin")).args(args).output().expect("binary runs");
    Outcome {
        code: out.status.code().expect("exited normally"),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join(name)
}

/// Runs a golden case twice; `Err` names the first mismatch.
pub fn check_golden(name: &str, args: &[&str]) -> Result<(), String> {
    let first = lusin(args);
    if first.code != 0 {
        return Err(format!("{}: exit {}: {}", name, first.code, first.stderr));
    }
    let second = lusin(args);
    if first.stdout != second.stdout {
        return Err(format!("{}: two runs differ", name));
    }
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &first.stdout).map_err(|e| e.to_string())?;
    }
    let stored = std::fs::read(&path).map_err(|e| format!("{}: {}", path.display(), e))?;
    if stored != first.stdout {
        return Err(format!("{}: output differs from the stored file", name));
    }
    Ok(())
}
