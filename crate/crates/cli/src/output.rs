use std::io;

use hcx_core::backward_error::BePath;
use hcx_core::certificates::{CertificateKind, CertificateReport};
use hcx_core::prs::PrsCase;
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::problem::Kind;

/// Pretty JSON with every float written as `d.ddddddddddddddddde±x`
/// (17 significant digits), so values survive a text round-trip bit for bit.
struct Digits17<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(value))
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Degenerate,
    NoConvergence,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Optimal => 0,
            Self::Error => 1,
            Self::Degenerate => 2,
            Self::NoConvergence => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct DualSummary {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct CertificateSummary {
    pub kind: CertificateKind,
    pub verdict: bool,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub lambda: f64,
    pub parameter: f64,
}

impl From<&CertificateReport> for CertificateSummary {
    fn from(r: &CertificateReport) -> Self {
        Self {
            kind: r.kind,
            verdict: r.verdict,
            min_eigenvalue: r.min_eigenvalue,
            tolerance: r.tolerance,
            lambda: r.lambda,
            parameter: r.parameter,
        }
    }
}

/// Full certificate as printed by `verify`, block matrix included.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct CertificateFile {
    #[serde(flatten)]
    pub summary: CertificateSummary,
    pub block_matrix: Vec<Vec<f64>>,
}

impl From<&CertificateReport> for CertificateFile {
    fn from(r: &CertificateReport) -> Self {
        Self { summary: r.into(), block_matrix: r.block_matrix.as_matrix().to_rows() }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct ResultFile {
    pub status: Status,
    pub kind: Kind,
    pub value: Option<f64>,
    pub x: Option<Vec<f64>>,
    pub dual: Option<DualSummary>,
    pub certificate: Option<CertificateSummary>,
    pub iterations: usize,
    /// `null` when timing is disabled, which makes the file reproducible.
    pub wall_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<PrsCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<BePath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_gap_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}
