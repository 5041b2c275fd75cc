//! Command-line front end: campaign files in, summaries and CSV tables out.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate, summarize, CredibleSummary, LossKind};
use crate::fusion::{fuse_to_posterior, weighted_mean, Campaign, FusionResult};
use crate::posterior::{Measurement, SignConstraint, TruncatedGaussianPosterior};
use crate::simulation::{
    self, CurveKind, DEFAULT_CURVE_FROM, DEFAULT_CURVE_STEP, DEFAULT_CURVE_TO,
};

/// Credible-interval probabilities used unless overridden.
pub const DEFAULT_PROB_LO: f64 = 0.25;
pub const DEFAULT_PROB_HI: f64 = 0.75;
/// Probabilities at which the published single-datum intervals sit.
pub const QUINTILE_PROB_LO: f64 = 0.20;
pub const QUINTILE_PROB_HI: f64 = 0.80;

#[derive(Debug, Parser)]
#[command(
    name = "signbayes",
    version,
    about = "Bayesian estimates of a quantity with a known sign"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse a campaign file into its weighted mean and summarise the posterior
    Fuse(FuseArgs),
    /// Summarise the posterior of a single measurement
    Estimate(EstimateArgs),
    /// Tabulate posterior pdf and cdf on a grid (CSV)
    Posterior(PosteriorArgs),
    /// Tabulate mean or median curves against the measured value (CSV)
    Curve(CurveArgs),
    /// Simulate how often results and their 1-sigma intervals come out positive (CSV)
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Squared,
    Absolute,
    ZeroOne,
}

impl LossArg {
    fn kind(self) -> LossKind {
        match self {
            LossArg::Squared => LossKind::SquaredError,
            LossArg::Absolute => LossKind::AbsoluteDifference,
            LossArg::ZeroOne => LossKind::ZeroOne,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKindArg {
    Mean,
    Median,
}

#[derive(Debug, Args)]
pub struct ConstraintArgs {
    /// Known sign of the measurand
    #[arg(long, value_enum, default_value = "negative")]
    pub sign: SignArg,
    /// Truncation point of the prior support
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub bound: f64,
}

impl ConstraintArgs {
    fn constraint(&self) -> SignConstraint {
        let base = match self.sign {
            SignArg::Negative => SignConstraint::non_positive(),
            SignArg::Positive => SignConstraint::non_negative(),
        };
        base.with_bound(self.bound)
    }
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    /// Lower credible-interval probability
    #[arg(long, conflicts_with = "quintile_bounds")]
    pub prob_lo: Option<f64>,
    /// Upper credible-interval probability
    #[arg(long, conflicts_with = "quintile_bounds")]
    pub prob_hi: Option<f64>,
    /// Use the 0.20 / 0.80 quantiles instead of the quartiles
    #[arg(long)]
    pub quintile_bounds: bool,
    /// Loss selecting the reported point estimate
    #[arg(long, value_enum, default_value = "squared")]
    pub loss: LossArg,
    /// Units label carried into the output
    #[arg(long, default_value = "arbitrary")]
    pub units: String,
    /// Emit a JSON document instead of a table
    #[arg(long)]
    pub json: bool,
}

impl SummaryArgs {
    fn probs(&self) -> (f64, f64) {
        if self.quintile_bounds {
            (QUINTILE_PROB_LO, QUINTILE_PROB_HI)
        } else {
            (
                self.prob_lo.unwrap_or(DEFAULT_PROB_LO),
                self.prob_hi.unwrap_or(DEFAULT_PROB_HI),
            )
        }
    }
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Campaign CSV with header `value,sigma` (`-` reads standard input)
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
    #[command(flatten)]
    pub summary: SummaryArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub value: f64,
    #[arg(long)]
    pub sigma: f64,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
    #[command(flatten)]
    pub summary: SummaryArgs,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    #[arg(
        long,
        allow_negative_numbers = true,
        required_unless_present = "input",
        requires = "sigma"
    )]
    pub value: Option<f64>,
    #[arg(long, requires = "value")]
    pub sigma: Option<f64>,
    /// Use the fused posterior of a campaign file instead of one measurement
    #[arg(long, conflicts_with_all = ["value", "sigma"])]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
    /// Grid as `lo:hi:n`, endpoints inclusive
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub grid: Grid,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    pub kind: CurveKindArg,
    #[arg(long, default_value_t = DEFAULT_CURVE_FROM, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = DEFAULT_CURVE_TO, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = DEFAULT_CURVE_STEP)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub true_value: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected lo:hi:n, got `{s}`"));
    };
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad grid lower end `{lo}`: {e}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad grid upper end `{hi}`: {e}"))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|e| format!("bad grid size `{n}`: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("grid needs lo < hi, got {lo}:{hi}"));
    }
    if n < 2 {
        return Err(format!("grid needs at least 2 points, got {n}"));
    }
    Ok(Grid { lo, hi, n })
}

// ---------------------------------------------------------------------------
// Campaign files

/// Parses campaign CSV text: header `value,sigma`, `#` comments, one
/// measurement per row, order preserved.
pub fn parse_campaign_str(text: &str, label: &str) -> Result<Campaign> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyCampaign);
    }
    let header_line = rdr.position().line();
    if headers.len() != 2 || &headers[0] != "value" || &headers[1] != "sigma" {
        return Err(Error::Parse {
            line: header_line.max(1),
            message: format!(
                "expected header `value,sigma`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut measurements = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = &record[i];
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("{name} `{raw}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("{name} `{raw}` is not finite"),
                });
            }
            Ok(v)
        };
        let value = field(0, "value")?;
        let sigma = field(1, "sigma")?;
        if sigma <= 0.0 {
            return Err(Error::NonPositiveSigma { line, sigma });
        }
        measurements.push(Measurement { value, sigma });
    }
    Campaign::new(label, measurements)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        _ => Error::Parse {
            line,
            message: e.to_string(),
        },
    }
}

/// Reads a campaign file; `-` reads standard input.
pub fn parse_campaign(path: &Path) -> Result<Campaign> {
    let (text, label) = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Io(format!("reading standard input: {e}")))?;
        (s, "stdin".to_string())
    } else {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        (s, label)
    };
    parse_campaign_str(&text, &label)
}

// ---------------------------------------------------------------------------
// Result document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub mode: f64,
    pub q_lo: f64,
    pub q_hi: f64,
    pub prob_lo: f64,
    pub prob_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    pub loss: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintEntry {
    pub side: String,
    pub bound: f64,
}

/// Everything `fuse` and `estimate` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub ybar: f64,
    pub sigma_ybar: f64,
    pub n: usize,
    pub chi2: f64,
    pub posterior: PosteriorSummary,
    pub estimate: EstimateEntry,
    pub constraint: ConstraintEntry,
    pub units: String,
}

impl ResultDocument {
    fn build(
        fusion: FusionResult,
        p: &TruncatedGaussianPosterior,
        summary: CredibleSummary,
        loss: LossArg,
        units: &str,
    ) -> Result<Self> {
        let point = estimate(p, loss.kind())?;
        let c = p.constraint();
        Ok(ResultDocument {
            ybar: fusion.ybar,
            sigma_ybar: fusion.sigma_ybar,
            n: fusion.n,
            chi2: fusion.chi2,
            posterior: PosteriorSummary {
                mean: summary.mean,
                sd: summary.sd,
                median: summary.median,
                mode: p.mode(),
                q_lo: summary.q_lo,
                q_hi: summary.q_hi,
                prob_lo: summary.prob_lo,
                prob_hi: summary.prob_hi,
            },
            estimate: EstimateEntry {
                loss: point.loss.name().to_string(),
                value: point.value,
            },
            constraint: ConstraintEntry {
                side: match c.side {
                    crate::posterior::Side::NonPositive => "non-positive".into(),
                    crate::posterior::Side::NonNegative => "non-negative".into(),
                },
                bound: c.bound,
            },
            units: units.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document is always serialisable");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let mut row = |k: &str, v: String| {
            let _ = writeln!(s, "{k:<22}{v}");
        };
        let num = |x: f64| format!("{x:.10}");
        row("measurements", self.n.to_string());
        row("weighted mean", num(self.ybar));
        row("sigma of mean", num(self.sigma_ybar));
        row("chi2", num(self.chi2));
        row(
            "constraint",
            format!(
                "{} (bound {})",
                self.constraint.side,
                num(self.constraint.bound)
            ),
        );
        row("posterior mean", num(self.posterior.mean));
        row("posterior sd", num(self.posterior.sd));
        row("posterior median", num(self.posterior.median));
        row("posterior mode", num(self.posterior.mode));
        row(
            &format!("quantile {:.2}", self.posterior.prob_lo),
            num(self.posterior.q_lo),
        );
        row(
            &format!("quantile {:.2}", self.posterior.prob_hi),
            num(self.posterior.q_hi),
        );
        row(
            &format!("estimate ({})", self.estimate.loss),
            num(self.estimate.value),
        );
        row("units", self.units.clone());
        s
    }
}

pub fn cmd_fuse(
    campaign: &Campaign,
    constraint: SignConstraint,
    summary: &SummaryArgs,
) -> Result<ResultDocument> {
    let fusion = weighted_mean(campaign)?;
    let p = fuse_to_posterior(campaign, constraint)?;
    let (lo, hi) = summary.probs();
    let s = summarize(&p, lo, hi)?;
    ResultDocument::build(fusion, &p, s, summary.loss, &summary.units)
}

pub fn cmd_estimate(
    m: Measurement,
    constraint: SignConstraint,
    summary: &SummaryArgs,
) -> Result<ResultDocument> {
    let campaign = Campaign::new("", vec![Measurement::new(m.value, m.sigma)?])?;
    cmd_fuse(&campaign, constraint, summary)
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// Runs a parsed command and returns everything destined for standard
/// output. Nothing is printed until the whole result exists.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Fuse(a) => {
            let campaign = parse_campaign(&a.input)?;
            let doc = cmd_fuse(&campaign, a.constraint.constraint(), &a.summary)?;
            Ok(render(&doc, a.summary.json))
        }
        Command::Estimate(a) => {
            let m = Measurement::new(a.value, a.sigma)?;
            let doc = cmd_estimate(m, a.constraint.constraint(), &a.summary)?;
            Ok(render(&doc, a.summary.json))
        }
        Command::Posterior(a) => {
            let c = a.constraint.constraint();
            let grid = (a.grid.lo, a.grid.hi, a.grid.n);
            let rows = match (&a.input, a.value, a.sigma) {
                (Some(path), _, _) => {
                    let p = fuse_to_posterior(&parse_campaign(path)?, c)?;
                    simulation::density_table(&p, grid)?
                }
                (None, Some(value), Some(sigma)) => {
                    simulation::posterior_curve(Measurement::new(value, sigma)?, c, grid)?
                }
                _ => {
                    return Err(Error::InvalidParameter(
                        "posterior needs either --input or both --value and --sigma".into(),
                    ))
                }
            };
            to_csv(rows)
        }
        Command::Curve(a) => {
            let kind = match a.kind {
                CurveKindArg::Mean => CurveKind::MeanBand,
                CurveKindArg::Median => CurveKind::MedianQuartiles,
            };
            to_csv(simulation::estimator_curve(kind, a.from, a.to, a.step)?.rows)
        }
        Command::Coverage(a) => {
            if a.true_value > 0.0 {
                eprintln!(
                    "warning: true value {} lies outside the non-positive support",
                    a.true_value
                );
            }
            to_csv([simulation::coverage(a.true_value, a.sigma, a.n, a.seed)?])
        }
    }
}

fn render(doc: &ResultDocument, json: bool) -> String {
    if json {
        doc.to_json()
    } else {
        doc.to_table()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(
            parse_grid("-15:0:301").unwrap(),
            Grid {
                lo: -15.0,
                hi: 0.0,
                n: 301
            }
        );
        for bad in ["1:2", "0:-1:5", "0:1:1", "a:1:3", "0:1:x", "0:1:3:4"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn campaign_text() {
        let c = parse_campaign_str("# note\nvalue,sigma\n-1.5, 0.5\n# mid\n2,1\n", "t").unwrap();
        assert_eq!(c.label, "t");
        assert_eq!(
            c.measurements,
            vec![
                Measurement {
                    value: -1.5,
                    sigma: 0.5
                },
                Measurement {
                    value: 2.0,
                    sigma: 1.0
                }
            ]
        );
    }

    #[test]
    fn campaign_errors_carry_line_numbers() {
        assert_eq!(
            parse_campaign_str("# only\n# comments\n", "").unwrap_err(),
            Error::EmptyCampaign
        );
        assert_eq!(
            parse_campaign_str("", "").unwrap_err(),
            Error::EmptyCampaign
        );
        assert_eq!(
            parse_campaign_str("value,sigma\n", "").unwrap_err(),
            Error::EmptyCampaign
        );
        assert_eq!(
            parse_campaign_str("value,sigma\n0.5,1\n1.0,-2.0\n", "").unwrap_err(),
            Error::NonPositiveSigma {
                line: 3,
                sigma: -2.0
            }
        );
        match parse_campaign_str("value,sigma\n0.5,abc\n", "").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e:?}"),
        }
        match parse_campaign_str("value,sigma\n0.5,1\n1,2,3\n", "").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_campaign_str("x,y\n1,2\n", ""),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn json_document_round_trips() {
        let cli = Cli::try_parse_from([
            "signbayes",
            "estimate",
            "--value",
            "4.31",
            "--sigma",
            "3.76",
            "--json",
        ])
        .unwrap();
        let out = run(&cli).unwrap();
        let doc: ResultDocument = serde_json::from_str(&out).unwrap();
        assert_eq!(doc.to_json(), out);
        assert_eq!(doc.units, "arbitrary");
        assert_eq!(doc.constraint.side, "non-positive");
        assert_eq!((doc.posterior.prob_lo, doc.posterior.prob_hi), (0.25, 0.75));
    }

    #[test]
    fn quintile_bounds_conflict_with_explicit_probs() {
        let r = Cli::try_parse_from([
            "signbayes",
            "estimate",
            "--value",
            "1",
            "--sigma",
            "1",
            "--quintile-bounds",
            "--prob-lo",
            "0.1",
        ]);
        assert!(r.is_err());
    }
}
