use cdsel_core::sparse::SyntheticSpec;

/// Parses `n=200,d=100,sparsity=0.3,signal=5,noise=0.01[,seed=7]`.
/// `seed` defaults to `default_seed`.
pub fn parse_synthetic(text: &str, default_seed: u64) -> Result<SyntheticSpec, String> {
    let mut n = None;
    let mut d = None;
    let mut sparsity = None;
    let mut signal = None;
    let mut noise = None;
    let mut seed = None;
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{part}`"))?;
        let bad = |what: &str| format!("bad {what} `{value}` in synthetic spec");
        match key.trim() {
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad("n"))?),
            "d" => d = Some(value.parse::<usize>().map_err(|_| bad("d"))?),
            "sparsity" => sparsity = Some(value.parse::<f64>().map_err(|_| bad("sparsity"))?),
            "signal" => signal = Some(value.parse::<usize>().map_err(|_| bad("signal"))?),
            "noise" => noise = Some(value.parse::<f64>().map_err(|_| bad("noise"))?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
            other => return Err(format!("unknown synthetic key `{other}`")),
        }
    }
    let need =
        |v: Option<usize>, key: &str| v.ok_or_else(|| format!("synthetic spec needs `{key}`"));
    let d = need(d, "d")?;
    Ok(SyntheticSpec {
        n: need(n, "n")?,
        d,
        sparsity: sparsity.unwrap_or(0.3),
        nnz_signal: signal.unwrap_or(d.min(10)),
        noise_sd: noise.unwrap_or(0.01),
        seed: seed.unwrap_or(default_seed),
    })
}
