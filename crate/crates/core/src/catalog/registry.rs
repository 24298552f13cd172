use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExponentParams;
use crate::gen::ParamDraw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    AsPrinted,
    Corrected,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::AsPrinted => "AS_PRINTED",
            Variant::Corrected => "CORRECTED",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "as-printed" | "printed" => Ok(Variant::AsPrinted),
            "corrected" => Ok(Variant::Corrected),
            other => Err(format!("unknown variant '{other}'")),
        }
    }
}

/// How a record is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FormClass {
    /// Pointwise in vectors `x`, `y`.
    Vector,
    /// Real numbers `a`, `b`.
    Scalar,
    /// Numerical radii, norms and sphere infima of `T` (and `S`).
    Operator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Kind {
    Schwarz,
    ReidPrinted,
    ReidCorrected,
    Kato,
    KittanehFg,
    FurutaPrinted,
    FurutaCorrected,
    NormSandwich,
    Kitt2003,
    Kitt2005Lower,
    Kitt2005Upper,
    Yamazaki,
    DragomirPrinted,
    DragomirCorrected,
    Jensen,
    JensenConcave,
    Young,
    Sms,
    Thm24Printed,
    Thm24Corrected,
    Cor25,
    RemHalf,
    RemTAbsT,
    Thm27Printed,
    Thm27Corrected,
    Cor28Printed,
    Cor28Corrected,
    Rem29Printed,
    Rem29Corrected,
    Rem210Printed,
    Rem210Corrected,
    Rem211Printed,
    Rem211Corrected,
    Thm212,
    Thm213,
    Rem214,
    Thm215,
    Cor216,
    RemSumHalf,
    RemSumOne,
}

/// One inequality of the catalog.
#[derive(Debug, Clone)]
pub struct Record {
    pub id: &'static str,
    pub equation: &'static str,
    pub variant: Variant,
    pub form: FormClass,
    pub hypothesis: &'static str,
    pub notes: &'static str,
    /// The printed display already states this form (single-variant rows).
    pub printed_matches: bool,
    pub(crate) kind: Kind,
}

/// Inputs a record needs besides `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Needs {
    pub pair: bool,
    pub second: bool,
    pub vectors: bool,
    pub scalars: bool,
}

impl Record {
    pub fn needs(&self) -> Needs {
        use Kind::*;
        Needs {
            pair: matches!(self.kind, ReidPrinted | ReidCorrected | KittanehFg),
            second: matches!(self.kind, Thm215 | Cor216),
            vectors: self.form == FormClass::Vector,
            scalars: self.form == FormClass::Scalar,
        }
    }

    /// Overrides the parameters a record fixes.
    pub fn fix(&self, mut p: ExponentParams) -> ExponentParams {
        use Kind::*;
        match self.kind {
            Cor25 => p.m = 2.0,
            RemHalf => {
                (p.alpha, p.beta, p.r, p.m) = (0.5, 0.5, 1.0, 2.0);
            }
            RemTAbsT => {
                (p.alpha, p.beta, p.r, p.m) = (1.0, 1.0, 1.0, 2.0);
            }
            Cor28Printed | Cor28Corrected => p.r = 1.0,
            Rem29Printed | Rem29Corrected => {
                p.alpha = 1.0 / p.s;
                p.beta = 1.0 / p.s;
                p.r = 1.0;
            }
            Rem210Printed | Rem210Corrected => {
                (p.alpha, p.beta, p.s, p.r) = (1.0, 1.0, 1.0, 1.0);
            }
            Rem211Printed | Rem211Corrected => {
                (p.alpha, p.beta, p.s, p.r) = (0.5, 0.5, 1.0, 2.0);
            }
            Thm213 => p = p.with_p(2.0),
            Rem214 => {
                (p.alpha, p.beta, p.s) = (0.5, 0.5, 1.0);
                p = p.with_p(2.0);
            }
            Cor216 => p.r = 1.0,
            RemSumHalf => {
                (p.alpha, p.beta, p.gamma, p.delta) = (0.5, 0.5, 0.5, 0.5);
            }
            RemSumOne => {
                (p.alpha, p.beta, p.gamma, p.delta) = (1.0, 1.0, 1.0, 1.0);
            }
            _ => {}
        }
        p
    }

    /// Admissible parameters derived from a shared draw.
    pub fn params_from(&self, d: &ParamDraw) -> ExponentParams {
        use Kind::*;
        let mut p = d.base;
        match self.kind {
            Kato | KittanehFg => p.alpha = d.unit,
            FurutaPrinted => (p.alpha, p.beta) = d.unit_pair,
            Thm24Corrected => p.m = p.m.round(),
            Sms => p.m = d.m_int,
            Rem29Printed | Rem29Corrected => p.s = 1.0 + 0.5 * (p.s - 1.0),
            _ => {}
        }
        self.fix(p)
    }
}

macro_rules! rec {
    ($id:expr, $eq:expr, $variant:ident, $form:ident, $kind:ident, $matches:expr, $hyp:expr, $notes:expr) => {
        Record {
            id: $id,
            equation: $eq,
            variant: Variant::$variant,
            form: FormClass::$form,
            hypothesis: $hyp,
            notes: $notes,
            printed_matches: $matches,
            kind: Kind::$kind,
        }
    };
}

const AB: &str = "alpha, beta >= 0 and alpha + beta >= 1";

fn build() -> Vec<Record> {
    vec![
        rec!("SCHWARZ_1_1", "(1.1)", Corrected, Vector, Schwarz, true,
            "A positive (pair A, or |T| when no pair is given)",
            "|<Ax,y>|^2 <= <Ax,x><Ay,y>"),
        rec!("REID_1_2", "(1.2)", AsPrinted, Vector, ReidPrinted, false,
            "A positive, AB selfadjoint",
            "printed with an independent y on the left and ||B|| on the right; false for y != x"),
        rec!("REID_1_2", "(1.2)", Corrected, Vector, ReidCorrected, false,
            "A positive, AB selfadjoint",
            "y = x and spectral radius r(B) in place of ||B|| (strongest classical form)"),
        rec!("KATO_1_3", "(1.3)", Corrected, Vector, Kato, true,
            "0 <= alpha <= 1",
            "|<Tx,y>|^2 <= <|T|^{2a}x,x><|T*|^{2(1-a)}y,y>"),
        rec!("KITTANEH_FG_1_4", "(1.4)", Corrected, Vector, KittanehFg, true,
            "|A|B = B*|A| (commutation defect <= 1e-8 relative), 0 <= alpha <= 1",
            "power family f = t^a, g = t^(1-a); r(B) computed exactly from the generator polynomial"),
        rec!("FURUTA_1_5", "(1.5)", AsPrinted, Vector, FurutaPrinted, false,
            "alpha, beta in [0,1], alpha + beta >= 1",
            "printed with |T|^{2b} on y; fails for non-normal T (e.g. the 2x2 shift with x = e2, y = e1)"),
        rec!("FURUTA_1_5", "(1.5)", Corrected, Vector, FurutaCorrected, false,
            AB,
            "|T*|^{2b} on y, valid for all alpha, beta >= 0 with alpha + beta >= 1"),
        rec!("NORM_SANDWICH_1_6", "(1.6)", Corrected, Operator, NormSandwich, true,
            "none",
            "||T||/2 <= w(T) <= ||T||; both sides evaluated, the binding side is reported"),
        rec!("KITT2003_1_7", "(1.7)", Corrected, Operator, Kitt2003, true,
            "none",
            "w(T) <= (||T|| + ||T^2||^{1/2})/2"),
        rec!("KITT2005_LOWER", "(1.8)", Corrected, Operator, Kitt2005Lower, true,
            "none",
            "||T*T + TT*||/4 <= w(T)^2, sharp on the 2x2 shift"),
        rec!("KITT2005_UPPER", "(1.8)", Corrected, Operator, Kitt2005Upper, true,
            "none",
            "w(T)^2 <= ||T*T + TT*||/2, equality for normal T"),
        rec!("YAMAZAKI", "unnumbered (Aluthge bound)", Corrected, Operator, Yamazaki, true,
            "none",
            "w(T) <= (||T|| + w(Aluthge(T)))/2"),
        rec!("DRAGOMIR", "unnumbered (Buzano bound)", AsPrinted, Operator, DragomirPrinted, false,
            "none",
            "printed as (||T|| + w(T^2))/2; not homogeneous, fails for 3I"),
        rec!("DRAGOMIR", "unnumbered (Buzano bound)", Corrected, Operator, DragomirCorrected, false,
            "none",
            "(||T||^2 + w(T^2))/2"),
        rec!("JENSEN_2_1", "(2.1)", Corrected, Vector, Jensen, true,
            "S = |T| positive, r >= 1, x unit",
            "<Sx,x>^r <= <S^r x,x>"),
        rec!("JENSEN_2_2", "(2.2)", Corrected, Vector, JensenConcave, true,
            "S = |T| positive, exponent 1/r in (0,1], x unit",
            "<S^e x,x> <= <Sx,x>^e with e = 1/r"),
        rec!("YOUNG_REF_2_3", "(2.3)", Corrected, Scalar, Young, true,
            "a, b >= 0, 1/p + 1/q = 1",
            "ab + r0 (a^{p/2} - b^{q/2})^2 <= a^p/p + b^q/q"),
        rec!("SMS_2_4", "(2.4)", Corrected, Scalar, Sms, true,
            "a, b > 0, 1/p + 1/q = 1, m positive integer, r >= 1",
            "(a^{1/p} b^{1/q})^m + r0^m (a^{m/2} - b^{m/2})^2 <= (a^r/p + b^r/q)^{m/r}; fails for non-integer m"),
        rec!("THM2_4_2_5", "(2.5)", AsPrinted, Operator, Thm24Printed, false,
            "alpha, beta >= 0, alpha + beta >= 1, real m >= 1, r >= 1",
            "stated for all real m >= 1; the scalar step it relies on needs integer m (fails e.g. at T = 4I, alpha = 1, beta = 0.5, m = 1.5)"),
        rec!("THM2_4_2_5", "(2.5)", Corrected, Operator, Thm24Corrected, false,
            "alpha, beta >= 0, alpha + beta >= 1, integer m >= 1, r >= 1",
            "restricted to positive integer m"),
        rec!("COR2_5_2_6", "(2.6)", Corrected, Operator, Cor25, true,
            "alpha, beta >= 0, alpha + beta >= 1, r >= 1",
            "the m = 2 case of the general bound (w^2 on the left)"),
        rec!("REM_HALF", "remark after (2.6), alpha = beta = 1/2", Corrected, Operator, RemHalf, true,
            "none",
            "w(T)^2 <= ||(|T| + |T*|)||^2/4 - inf(<|T|x,x> - <|T*|x,x>)^2/4"),
        rec!("REM_TTABS", "remark after (2.6), alpha = beta = 1", Corrected, Operator, RemTAbsT, true,
            "none",
            "w(T|T|)^2 <= ||T*T + TT*||^2/4 - inf <(T*T - TT*)x,x>^2/4"),
        rec!("THM2_7_2_7", "(2.7)", AsPrinted, Operator, Thm27Printed, false,
            "alpha, beta >= 0, alpha + beta >= 1, r, s >= 1",
            "unsquared correction with exponents 2rs alpha, 2rs beta, evaluated with y = x"),
        rec!("THM2_7_2_7", "(2.7)", Corrected, Operator, Thm27Corrected, false,
            "alpha, beta >= 0, alpha + beta >= 1, r, s >= 1",
            "correction (1/4) inf(<|T|^{2s alpha}x,x> - <|T*|^{2s beta}x,x>)^2 as derived"),
        rec!("COR2_8_2_8", "(2.8)", AsPrinted, Operator, Cor28Printed, false,
            "alpha, beta >= 0, alpha + beta >= 1, s >= 1",
            "r = 1, unsquared correction"),
        rec!("COR2_8_2_8", "(2.8)", Corrected, Operator, Cor28Corrected, false,
            "alpha, beta >= 0, alpha + beta >= 1, s >= 1",
            "r = 1, squared correction"),
        rec!("REM_2_9", "(2.9)", AsPrinted, Operator, Rem29Printed, false,
            "1 <= s <= 2 (so that alpha + beta = 2/s >= 1)",
            "alpha = beta = 1/s, unsquared correction"),
        rec!("REM_2_9", "(2.9)", Corrected, Operator, Rem29Corrected, false,
            "1 <= s <= 2 (so that alpha + beta = 2/s >= 1)",
            "alpha = beta = 1/s, squared correction"),
        rec!("REM_2_10", "(2.10)", AsPrinted, Operator, Rem210Printed, false,
            "none",
            "s = 1, alpha = beta = 1, unsquared correction"),
        rec!("REM_2_10", "(2.10)", Corrected, Operator, Rem210Corrected, false,
            "none",
            "s = 1, alpha = beta = 1, squared correction"),
        rec!("REM_2_11", "(2.11)", AsPrinted, Operator, Rem211Printed, false,
            "none",
            "unsquared bracket of |T|^2, |T*|^2; its infimum is never positive in finite dimension"),
        rec!("REM_2_11", "(2.11)", Corrected, Operator, Rem211Corrected, false,
            "none",
            "(1/4) inf(<|T|x,x> - <|T*|x,x>)^2, which vanishes in finite dimension (equal traces)"),
        rec!("THM2_5B_2_12", "(2.12)", Corrected, Operator, Thm212, true,
            "alpha, beta >= 0, alpha + beta >= 1, s >= 1, 1/p + 1/q = 1",
            "Young-type refinement with exponents p/2, q/2 in the correction"),
        rec!("THM2_5B_2_13", "(2.13)", Corrected, Operator, Thm213, true,
            "alpha, beta >= 0, alpha + beta >= 1, s >= 1",
            "p = q = 2 case"),
        rec!("REM_2_14", "(2.14)", Corrected, Operator, Rem214, true,
            "none",
            "w(T)^2 <= ||T*T + TT*||/2 - inf(<|T|x,x> - <|T*|x,x>)^2/2; correction vanishes in finite dimension"),
        rec!("THM2_15_2_15", "(2.15)", Corrected, Operator, Thm215, true,
            "alpha + beta >= 1, gamma + delta >= 1, all >= 0, r >= 1; needs S",
            "bounds w of the sum T|T|^{a+b-1} + S|S|^{c+d-1}, although introduced as a commutator result"),
        rec!("COR_2_16", "(2.16)", Corrected, Operator, Cor216, true,
            "alpha + beta >= 1, gamma + delta >= 1, all >= 0; needs S",
            "r = 1 case with a single norm of the four-term sum"),
        rec!("REM_SUM_HALF", "remark after (2.16), S = T, exponents 1/2", Corrected, Operator, RemSumHalf, true,
            "none",
            "w(T) <= ||(|T| + |T*|)||/2 - inf(<|T|x,x>^{1/2} - <|T*|x,x>^{1/2})^2/2"),
        rec!("REM_SUM_ONE", "remark after (2.16), S = T, exponents 1", Corrected, Operator, RemSumOne, true,
            "none",
            "w(T|T|) <= ||T*T + TT*||/2 - inf(<|T|^2x,x>^{1/2} - <|T*|^2x,x>^{1/2})^2/2"),
    ]
}

pub fn registry() -> &'static [Record] {
    use std::sync::OnceLock;
    static REG: OnceLock<Vec<Record>> = OnceLock::new();
    REG.get_or_init(build)
}

/// Looks up `id` in the requested variant; single-variant records answer
/// for both variants.
pub fn find(id: &str, variant: Variant) -> Option<&'static Record> {
    let rows: Vec<&Record> = registry().iter().filter(|r| r.id == id).collect();
    rows.iter()
        .find(|r| r.variant == variant)
        .or_else(|| rows.iter().find(|r| r.printed_matches))
        .copied()
}

pub fn known_id(id: &str) -> bool {
    registry().iter().any(|r| r.id == id)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistryRow {
    pub id: &'static str,
    pub equation: &'static str,
    pub variant: Variant,
    pub form: FormClass,
    pub hypothesis: &'static str,
    pub notes: &'static str,
}

pub fn list_registry() -> Vec<RegistryRow> {
    registry()
        .iter()
        .map(|r| RegistryRow {
            id: r.id,
            equation: r.equation,
            variant: r.variant,
            form: r.form,
            hypothesis: r.hypothesis,
            notes: r.notes,
        })
        .collect()
}
