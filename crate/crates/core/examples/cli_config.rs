// Drive the `baelab` command line from code with a JSON configuration.
//
//     cargo run --example cli_config

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{
  "designs": [{"kind": "crt", "k": 3}, {"kind": "two_batch", "k": 3, "s": 1, "beta_first": 0.8, "name": "tb"}],
  "instance": {"means": [0.5, 0.0, 0.2], "sigma": 1},
  "t": [12, 24, 48],
  "replications": 2000,
  "seed": 42
}"#,
    )?;
    let config = config.to_str().ok_or("non-UTF-8 temp path")?;

    for args in [
        vec!["baelab", "check-dominance", "--two-batch", "k=3", "s=1", "beta=0.8"],
        vec!["baelab", "sweep", "--config", config],
    ] {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = bae_lab::cli::run(args.clone(), &mut out, &mut err);
        println!("$ {} -> exit {code}", args.join(" "));
        print!("{}{}", String::from_utf8_lossy(&out), String::from_utf8_lossy(&err));
        if code > 1 {
            return Err(format!("exit code {code}").into());
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
