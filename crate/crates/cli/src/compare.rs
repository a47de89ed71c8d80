use std::io::Write;

use cdsel_core::engine::{run, RunConfig, RunResult};
use cdsel_core::problems::Problem;
use cdsel_core::selection::StrategyConfig;

/// Suboptimality targets reported by `--compare`.
pub fn targets() -> [(&'static str, f64); 4] {
    [
        ("1e-1", 1e-1),
        ("1e-2", 1e-2),
        ("1e-3", 1e-3),
        ("exp(-5)", (-5f64).exp()),
    ]
}

pub struct MemberOutcome {
    pub label: String,
    pub result: Result<RunResult, String>,
}

/// Runs every strategy on the same problem against the shared `f_star`.
/// A failing member is recorded and does not stop the others.
pub fn compare(
    p: &Problem,
    strategies: &[StrategyConfig],
    base: &RunConfig,
    f_star: f64,
) -> Vec<MemberOutcome> {
    strategies
        .iter()
        .map(|s| {
            let mut cfg = base.clone();
            cfg.strategy = *s;
            cfg.f_star = Some(f_star);
            cfg.subopt_targets = targets().iter().map(|t| t.1).collect();
            cfg.stop_on_targets = true;
            MemberOutcome {
                label: s.kind.label().to_string(),
                result: run(p, &cfg).map_err(|e| e.to_string()),
            }
        })
        .collect()
}

/// One row per (strategy, target); unreached targets leave the numbers empty.
pub fn write_summary_csv<W: Write>(rows: &[MemberOutcome], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy",
        "status",
        "target",
        "epochs",
        "iterations",
        "wall_s",
    ])?;
    for row in rows {
        for (k, (label, _)) in targets().iter().enumerate() {
            match &row.result {
                Ok(res) => match res.target_hits[k] {
                    Some(hit) => w.write_record([
                        row.label.clone(),
                        "ok".into(),
                        label.to_string(),
                        hit.epoch.to_string(),
                        hit.iteration.to_string(),
                        format!("{:.6}", hit.elapsed_s),
                    ])?,
                    None => w.write_record([&row.label, "unreached", *label, "", "", ""])?,
                },
                Err(_) => w.write_record([&row.label, "failed", *label, "", "", ""])?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Human-readable table of epochs (and seconds) to each target; `—` marks
/// targets not reached within the budget.
pub fn render_table(rows: &[MemberOutcome]) -> String {
    let mut header = vec!["strategy".to_string()];
    header.extend(targets().iter().map(|(l, _)| format!("epochs@{l}")));
    header.push(format!("wall_s@{}", targets()[3].0));
    let mut lines = vec![header];
    for row in rows {
        let mut line = vec![row.label.clone()];
        match &row.result {
            Ok(res) => {
                line.extend(
                    res.target_hits
                        .iter()
                        .map(|h| h.map_or("—".to_string(), |h| format!("{:.3}", h.epoch))),
                );
                line.push(
                    res.target_hits[3].map_or("—".to_string(), |h| format!("{:.4}", h.elapsed_s)),
                );
            }
            Err(e) => line.push(format!("FAILED: {e}")),
        }
        lines.push(line);
    }
    let cols = lines.iter().map(Vec::len).max().unwrap_or(0);
    // failure messages are left unpadded and do not widen the columns
    let width: Vec<usize> = (0..cols)
        .map(|c| {
            lines
                .iter()
                .filter(|l| l.len() == cols)
                .filter_map(|l| l.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c + 1 == line.len() {
                    s.clone()
                } else {
                    format!(
                        "{s}{}",
                        " ".repeat(width[c].saturating_sub(s.chars().count()))
                    )
                }
            })
            .collect();
        out.push_str(&cells.join("  "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use cdsel_core::problems::make_lasso;
    use cdsel_core::selection::StrategyKind;
    use cdsel_core::sparse::{generate_synthetic, SyntheticSpec};

    fn problem() -> Problem {
        let (data, _) = generate_synthetic(&SyntheticSpec {
            n: 40,
            d: 20,
            sparsity: 0.3,
            nnz_signal: 4,
            noise_sd: 0.1,
            seed: 1,
        })
        .unwrap();
        make_lasso(&data, 0.01).unwrap()
    }

    fn base(epochs: f64) -> RunConfig {
        RunConfig::new(StrategyConfig::new(StrategyKind::Uniform), epochs, 3)
    }

    #[test]
    fn single_member_table() {
        let p = problem();
        let f_star = cdsel_core::engine::reference_optimum(&p, 1e-10)
            .unwrap()
            .f_star;
        let rows = compare(
            &p,
            &[StrategyConfig::new(StrategyKind::MaxR)],
            &base(50.0),
            f_star,
        );
        let table = render_table(&rows);
        assert_eq!(table.lines().count(), 2);
        assert!(table.lines().nth(1).unwrap().starts_with("max_r"));
        assert!(!table.contains('—'));
    }

    #[test]
    fn unreachable_targets_are_marked() {
        let p = problem();
        // an unattainable optimum: no target can be met
        let rows = compare(
            &p,
            &[StrategyConfig::new(StrategyKind::Uniform)],
            &base(1.0),
            -1.0,
        );
        assert!(rows[0].result.is_ok());
        assert_eq!(render_table(&rows).matches('—').count(), 5);
        let mut buf = Vec::new();
        write_summary_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("unreached").count(), 4);
    }

    #[test]
    fn failures_do_not_stop_the_rest() {
        let p = problem();
        let members = [
            StrategyConfig::new(StrategyKind::GaussSouthwell),
            StrategyConfig::new(StrategyKind::BMaxR),
        ];
        let rows = compare(&p, &members, &base(5.0), 0.0);
        assert!(rows[0].result.is_err());
        assert!(rows[1].result.is_ok());
        assert!(render_table(&rows).contains("FAILED"));
    }
}
