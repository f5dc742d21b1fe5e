//! Parse a minimal config, show the resolved document, and a rejection.

use twinway::config::parse_config;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = parse_config("seed = 42\n[scenario]\nev_penetration = 0.25\n")?;
    let resolved = config.to_toml();
    println!("{resolved}");
    assert_eq!(parse_config(&resolved)?, config);

    for bad in [
        "[scenario]\nev_penetration = 1.5\n",
        "[corridor]\nlanes = 3\n",
    ] {
        println!("{:?} -> {}", bad, parse_config(bad).unwrap_err());
    }
    Ok(())
}
