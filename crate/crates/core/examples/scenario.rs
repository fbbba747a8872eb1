//! Validates and runs a scenario held in memory.

use loopnet::scenario::{self, RunOptions};

const CONFIG: &str = r#"{
  "algebra": {"key": "su2"},
  "loops": [
    {"domain": "line", "name": "g", "factors": [
      {"generator": {"basis": 0}, "profile": {"kind": "gaussian", "center": 0.0, "width": 1.0, "amplitude": 1.0}}
    ]}
  ],
  "tasks": [
    {"task": "entropy-profile", "path": "g", "grid": {"t_min": -2.0, "t_max": 2.0, "points": 9}},
    {"task": "bekenstein", "path": "g", "radii": [0.5, 1.0, 5.0]},
    {"task": "alcove"}
  ]
}"#;

fn main() -> loopnet::Result<()> {
    let s = scenario::validate_config(CONFIG)?;
    let (report, artifacts) = scenario::run_scenario(&s, RunOptions::default());
    for t in &report.tasks {
        println!("{} {} {:?}", t.index, t.task, t.status);
    }
    for a in &artifacts {
        println!("{} ({} bytes)", a.name, a.bytes.len());
    }
    match scenario::validate_config(&CONFIG.replace("\"points\"", "\"pionts\"")) {
        Ok(_) => println!("unexpected"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
