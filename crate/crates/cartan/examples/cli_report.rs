// Drive the command line front end in-process and read back its JSON report.

use std::path::PathBuf;

pub fn run_example() -> (i32, serde_json::Value) {
    let out: PathBuf =
        std::env::temp_dir().join(format!("cartan-cli-example-{}.json", std::process::id()));
    let code = cartan::cli::main_with_args([
        "cartan",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
        "ek",
        "classify",
        "--c1",
        "1",
        "--c2",
        "0",
    ]);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    let _ = std::fs::remove_file(&out);
    (
        code,
        serde_json::from_str(&text).unwrap_or(serde_json::Value::Null),
    )
}

#[allow(dead_code)]
fn main() {
    let (code, report) = run_example();
    println!("exit code {code}");
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}
