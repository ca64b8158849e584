use clap::Args;

/// Coupling values: an evenly spaced range or an explicit list.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// First coupling of an evenly spaced grid.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    /// Last coupling of an evenly spaced grid.
    #[arg(long, allow_hyphen_values = true)]
    pub stop: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub count: Option<usize>,
    /// Explicit couplings, comma separated. Excludes --start/--stop/--count.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["start", "stop", "count"])]
    pub lambda: Vec<f64>,
}

impl GridArgs {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        if !self.lambda.is_empty() {
            if let Some(bad) = self.lambda.iter().find(|x| !x.is_finite()) {
                return Err(format!("coupling {bad} is not finite"));
            }
            return Ok(self.lambda.clone());
        }
        let (Some(start), Some(stop), Some(count)) = (self.start, self.stop, self.count) else {
            return Err("give --lambda or all of --start, --stop and --count".into());
        };
        if count == 0 {
            return Err("grid is empty: --count must be at least 1".into());
        }
        if !(start.is_finite() && stop.is_finite()) || start > stop {
            return Err(format!("need finite --start <= --stop, got {start} and {stop}"));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (stop - start) / (count - 1) as f64;
        Ok((0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range(start: f64, stop: f64, count: usize) -> GridArgs {
        GridArgs { start: Some(start), stop: Some(stop), count: Some(count), lambda: vec![] }
    }

    #[test]
    fn ranges() {
        assert_eq!(range(0.0, 1.0, 3).points().unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(range(2.0, 2.0, 1).points().unwrap(), vec![2.0]);
        assert_eq!(range(0.0, 6.0, 121).points().unwrap()[120], 6.0);
        assert!(range(0.0, 1.0, 0).points().is_err());
        assert!(range(1.0, 0.0, 4).points().is_err());
    }

    #[test]
    fn lists() {
        let g = GridArgs { start: None, stop: None, count: None, lambda: vec![1.0, -0.5] };
        assert_eq!(g.points().unwrap(), vec![1.0, -0.5]);
        let empty = GridArgs { start: None, stop: Some(1.0), count: None, lambda: vec![] };
        assert!(empty.points().is_err());
    }
}
