//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p roomforge-cli --test acceptance`.

mod criteria;

use std::process::ExitCode;
use std::time::{Duration, Instant};

pub type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let all = [
        Criterion {
            name: "physics verifiers",
            budget: Duration::from_secs(10),
            run: criteria::physics_verifiers,
        },
        Criterion {
            name: "surface detection oracle",
            budget: Duration::from_secs(5),
            run: criteria::surface_oracle,
        },
        Criterion {
            name: "ray cast oracle",
            budget: Duration::from_secs(10),
            run: criteria::ray_cast_oracle,
        },
        Criterion {
            name: "projection duality",
            budget: Duration::from_secs(60),
            run: criteria::projection_duality,
        },
        Criterion {
            name: "room builder conservation",
            budget: Duration::from_secs(2),
            run: criteria::room_conservation,
        },
        Criterion {
            name: "scene loop monotonicity and selection",
            budget: Duration::from_secs(30),
            run: criteria::scene_loop,
        },
        Criterion {
            name: "in-context library rule",
            budget: Duration::from_secs(1),
            run: criteria::library_rule,
        },
        Criterion {
            name: "asset loop caps and validity",
            budget: Duration::from_secs(20),
            run: criteria::asset_loop,
        },
        Criterion {
            name: "end-to-end offline demo",
            budget: Duration::from_secs(60),
            run: criteria::end_to_end,
        },
        Criterion {
            name: "remote backend contract",
            budget: Duration::from_secs(10),
            run: criteria::remote_contract,
        },
    ];
    let mut failed = 0;
    let mut ran = 0;
    for c in all.iter().filter(|c| filter.is_empty() || filter.iter().any(|f| c.name.contains(f.as_str()))) {
        ran += 1;
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let dt = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if dt > c.budget => Err(format!("{detail}; over budget {:.0?}", c.budget)),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<40} {:>8.2?}  {detail}", c.name, dt),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:<40} {:>8.2?}  {why}", c.name, dt);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
