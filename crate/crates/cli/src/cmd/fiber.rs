use clap::Subcommand;
use serde_json::{json, Value};

use lusin_core::fiber::{amplify, verify_amplifier, AmplifierState};
use lusin_core::games::BaireModel;

use super::game::player_ii;
use crate::report::{domain, strings, Failure, Report, Table};
use crate::Output;

#[derive(Subcommand)]
pub enum Command {
    /// Run the amplification and print every level
    Amplify {
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Player II in the domain games
        #[arg(long, default_value = "basic")]
        domain_ii: String,
        /// Player II in the target game
        #[arg(long, default_value = "strict:basic")]
        target_ii: String,
        #[command(flatten)]
        out: Output,
    },
    /// Run the amplification and re-check the resulting pieces
    Verify {
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value = "basic")]
        domain_ii: String,
        #[arg(long, default_value = "strict:basic")]
        target_ii: String,
        #[command(flatten)]
        out: Output,
    },
}

fn build(depth: usize, domain_ii: &str, target_ii: &str) -> Result<AmplifierState, Failure> {
    if depth > 16 {
        return Err(Failure::Usage(String::from("--depth is limited to 16")));
    }
    let d = player_ii::<BaireModel>(domain_ii)?;
    let t = player_ii::<BaireModel>(target_ii)?;
    amplify(depth, d.as_ref(), t.as_ref()).map_err(domain)
}

pub fn run(c: Command) -> Result<(Report, Output), Failure> {
    match c {
        Command::Amplify { depth, domain_ii, target_ii, out } => {
            let state = build(depth, &domain_ii, &target_ii)?;
            let mut table = Table::new(&["level", "branch", "w", "u", "v", "target", "target_v"]);
            let levels: Vec<Value> = state
                .levels
                .iter()
                .enumerate()
                .map(|(k, lv)| {
                    for i in 0..lv.w.len() {
                        table.push([
                            k.to_string(),
                            i.to_string(),
                            lv.w[i].to_string(),
                            lv.u[i].to_string(),
                            lv.v[i].to_string(),
                            lv.w_tilde.to_string(),
                            lv.v_tilde.to_string(),
                        ]);
                    }
                    json!({
                        "level": k,
                        "w": strings(&lv.w),
                        "w_tilde": lv.w_tilde.to_string(),
                        "u": strings(&lv.u),
                        "v": strings(&lv.v),
                        "u_tilde": lv.u_tilde.to_string(),
                        "v_tilde": lv.v_tilde.to_string(),
                    })
                })
                .collect();
            let payload = json!({
                "depth": state.depth,
                "levels": levels,
                "pieces": strings(&state.pieces),
                "target": state.target.to_string(),
                "transcript": state.transcript,
            });
            let input = json!({"depth": depth, "domain_ii": domain_ii, "target_ii": target_ii});
            Ok((Report { kind: "run", command: "fiber amplify", input, payload, table, ok: true }, out))
        }
        Command::Verify { depth, domain_ii, target_ii, out } => {
            let state = build(depth, &domain_ii, &target_ii)?;
            let input = json!({"depth": depth, "domain_ii": domain_ii, "target_ii": target_ii});
            let mut table = Table::new(&["stem", "image"]);
            let (payload, ok) = match verify_amplifier(&state) {
                Ok(cert) => {
                    for s in &cert.stems {
                        table.push([s.to_string(), cert.image.to_string()]);
                    }
                    let p = json!({
                        "depth": cert.depth,
                        "image": cert.image.to_string(),
                        "count": cert.stems.len(),
                        "stems": strings(&cert.stems),
                        "verified": true,
                        "error": Value::Null,
                    });
                    (p, true)
                }
                Err(e) => (json!({"depth": depth, "verified": false, "error": e.to_string()}), false),
            };
            Ok((Report { kind: "certificate", command: "fiber verify", input, payload, table, ok }, out))
        }
    }
}
