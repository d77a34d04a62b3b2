use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Every flat family case. Identifiers are fixed by the JSON interface.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Kind {
    T2_1_2,
    T2_1_3,
    C2_2,
    C2_3,
    T2_5_1,
    T2_5_2,
    T2_5_3,
    T2_5_4,
    T2_6_1,
    T2_6_2,
    T2_6_3,
    T2_7_1,
    T2_7_2,
    T2_8_1,
    T2_8_2,
    T2_8_3,
    T2_8_4,
    T2_8_5,
    T2_8_6,
    T2_9_1,
    T2_9_2,
    T2_9_3,
    T2_9_4,
    T2_9_5,
    T3_1,
    T3_3,
    T3_5_1,
    T3_5_2,
    T3_5_3,
    T3_7_1,
    T3_7_2,
    T3_7_3,
    T3_7_4,
    T3_7_5,
    T3_7_6,
    T3_7_7,
    T3_8,
}

/// Static description of a kind for listings and defaults.
#[derive(Debug)]
pub struct KindInfo {
    pub kind: Kind,
    pub id: &'static str,
    /// Which variable each coefficient may depend on.
    pub shape: &'static str,
    /// The coefficients of the flat metric.
    pub form: &'static str,
    /// `(name, description)`; parameters marked "default" are optional.
    pub params: &'static [(&'static str, &'static str)],
    /// A valid parameter object for `example_box`.
    pub example: &'static str,
    pub example_box: &'static str,
}

const F1_FREE: (&str, &str) = ("f1", "expression in x1, nowhere zero on I1");
const F3_FREE: (&str, &str) = ("f3", "expression in x3, nowhere zero on I3");
const F3_FREE_DEFAULT: (&str, &str) = ("f3", "expression in x3, nowhere zero on I3 (default \"1\")");

macro_rules! k {
    ($n:literal) => {
        ($n, "nonzero constant")
    };
    ($n:literal, default) => {
        ($n, "nonzero constant (default 1)")
    };
}

macro_rules! c_out {
    ($n:literal, $axis:literal) => {
        ($n, concat!("constant outside I", $axis))
    };
}

const C_OUT_F: &str = "constant outside F(I1)";

use Kind::*;

pub static CATALOG: [KindInfo; 37] = [
    KindInfo {
        kind: T2_1_2,
        id: "T2_1_2",
        shape: "f1(x1), f2(x1), f3(x1)",
        form: "f1 free; f2 = k2; f3 = k3/(F - c3), F' = 1/f1, F(mid I1) = 0",
        params: &[F1_FREE, k!("k2", default), k!("k3"), ("c3", C_OUT_F)],
        example: r#"{"f1": "exp(x1)", "k3": 1, "c3": 1}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_1_3,
        id: "T2_1_3",
        shape: "f1(x1), f2(x1), f3(x1)",
        form: "f1 free; f2 = k2/(F - c2), F' = 1/f1, F(mid I1) = 0; f3 = k3",
        params: &[F1_FREE, k!("k2"), ("c2", C_OUT_F), k!("k3", default)],
        example: r#"{"f1": "2 + sin(x1)", "k2": 1, "c2": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: C2_2,
        id: "C2_2",
        shape: "f1(x1) with f1'/f1 = c0 != 0, f2(x1), f3(x1)",
        form: "f1 = c1 exp(c0 x1); f_j = k_j/(exp(-c0 x1) - c_j) for j = which; the other coefficient constant",
        params: &[
            ("c0", "nonzero constant"),
            ("c1", "nonzero constant"),
            ("which", "2 or 3: the nonconstant coefficient (default 3)"),
            ("k2", "nonzero constant (default 1)"),
            ("k3", "nonzero constant (default 1)"),
            ("c2", "when which = 2: constant outside exp(-c0 I1)"),
            ("c3", "when which = 3: constant outside exp(-c0 I1)"),
        ],
        example: r#"{"c0": 1, "c1": 1, "which": 3, "k3": 1, "c3": -1}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: C2_3,
        id: "C2_3",
        shape: "f1 constant, f2(x1), f3(x1)",
        form: "f1 = k1; f_j = k_j/(x1 - c_j) for j = which; the other coefficient constant",
        params: &[
            k!("k1"),
            ("which", "2 or 3: the nonconstant coefficient (default 3)"),
            ("k2", "nonzero constant (default 1)"),
            ("k3", "nonzero constant (default 1)"),
            ("c2", "when which = 2: constant outside I1"),
            ("c3", "when which = 3: constant outside I1"),
        ],
        example: r#"{"k1": 1, "which": 3, "k3": 1, "c3": -2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_5_1,
        id: "T2_5_1",
        shape: "f1(x2), f2(x3), f3(x1)",
        form: "f1 = k1; f2 = k2; f3 = k3",
        params: &[k!("k1"), k!("k2"), k!("k3")],
        example: r#"{"k1": 1, "k2": 2, "k3": 0.5}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_5_2,
        id: "T2_5_2",
        shape: "f1(x2), f2(x3), f3(x1)",
        form: "f1 = k1; f2 = k2; f3 = k3/(x1 - c3)",
        params: &[k!("k1", default), k!("k2", default), k!("k3"), c_out!("c3", "1")],
        example: r#"{"k3": 1, "c3": -2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_5_3,
        id: "T2_5_3",
        shape: "f1(x2), f2(x3), f3(x1)",
        form: "f1 = k1/(x2 - c1); f2 = k2; f3 = k3",
        params: &[k!("k1"), c_out!("c1", "2"), k!("k2", default), k!("k3", default)],
        example: r#"{"k1": 1, "c1": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_5_4,
        id: "T2_5_4",
        shape: "f1(x2), f2(x3), f3(x1)",
        form: "f1 = k1; f2 = k2/(x3 - c2); f3 = k3",
        params: &[k!("k1", default), k!("k2"), c_out!("c2", "3"), k!("k3", default)],
        example: r#"{"k2": -1, "c2": 1.5}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_6_1,
        id: "T2_6_1",
        shape: "f1(x1), f2(x1), f3(x2)",
        form: "f1 free; f2 = k2; f3 = k3",
        params: &[F1_FREE, k!("k2", default), k!("k3", default)],
        example: r#"{"f1": "1 + x1*x1", "k2": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_6_2,
        id: "T2_6_2",
        shape: "f1(x1), f2(x1), f3(x2)",
        form: "f1 free; f2 = k2; f3 = k3/(x2 - c3)",
        params: &[F1_FREE, k!("k2", default), k!("k3"), c_out!("c3", "2")],
        example: r#"{"f1": "exp(x1)", "k3": 1, "c3": -1.5}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_6_3,
        id: "T2_6_3",
        shape: "f1(x1), f2(x1), f3(x2)",
        form: "f1 free; f2 = k2/(F - c2), F' = 1/f1, F(mid I1) = 0; f3 = k3",
        params: &[F1_FREE, k!("k2"), ("c2", C_OUT_F), k!("k3", default)],
        example: r#"{"f1": "1/(3 + x1*x1)", "k2": 1, "c2": 5}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_7_1,
        id: "T2_7_1",
        shape: "f1(x1), f2(x1), f3(x3)",
        form: "f1 free; f2 = k2; f3 free",
        params: &[F1_FREE, k!("k2", default), F3_FREE],
        example: r#"{"f1": "exp(x1)", "f3": "2 + cos(x3)"}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_7_2,
        id: "T2_7_2",
        shape: "f1(x1), f2(x1), f3(x3)",
        form: "f1 free; f2 = k2/(F - c2), F' = 1/f1, F(mid I1) = 0; f3 free",
        params: &[F1_FREE, k!("k2"), ("c2", C_OUT_F), F3_FREE],
        example: r#"{"f1": "exp(x1)", "k2": 1, "c2": 1, "f3": "exp(x3)"}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_8_1,
        id: "T2_8_1",
        shape: "f1(x3), f2(x3), f3(x1)",
        form: "f1 = k1; f2 = k2; f3 = k3",
        params: &[k!("k1"), k!("k2"), k!("k3")],
        example: r#"{"k1": 2, "k2": 1, "k3": -1}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_8_2,
        id: "T2_8_2",
        shape: "f1(x3), f2(x3), f3(x1)",
        form: "f1 = k1/(x3 - c1); f2 = k2; f3 = k3",
        params: &[k!("k1"), c_out!("c1", "3"), k!("k2", default), k!("k3", default)],
        example: r#"{"k1": 1, "c1": -2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_8_3,
        id: "T2_8_3",
        shape: "f1(x3), f2(x3), f3(x1)",
        form: "f1 = k1; f2 = k2/(x3 - c2); f3 = k3",
        params: &[k!("k1", default), k!("k2"), c_out!("c2", "3"), k!("k3", default)],
        example: r#"{"k2": 1, "c2": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_8_4,
        id: "T2_8_4",
        shape: "f1(x3), f2(x3), f3(x1)",
        form: "f1 = k1; f2 = k2; f3 = k3/(x1 - c3)",
        params: &[k!("k1", default), k!("k2", default), k!("k3"), c_out!("c3", "1")],
        example: r#"{"k3": 1, "c3": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_8_5,
        id: "T2_8_5",
        shape: "f1(x3), f2(x3), f3(x1)",
        form: "f1 = k1/(x3 - c1); f2 = k2; f3 = k3/(x1 - c3)",
        params: &[
            k!("k1"),
            c_out!("c1", "3"),
            k!("k2", default),
            k!("k3"),
            c_out!("c3", "1"),
        ],
        example: r#"{"k1": 1, "c1": -2, "k3": 2, "c3": 3}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_8_6,
        id: "T2_8_6",
        shape: "f1(x3), f2(x3), f3(x1)",
        form: "f1 = 1/g1(x3), f3 = 1/g3(x1) with g_i g_i'' = -k_i, k3 = -k1; f2 = k2",
        params: &[
            k!("k1"),
            k!("k2", default),
            (
                "f1",
                "factor on x3: {\"z0\", \"x0\"} (glued) or {\"z0\", \"eta\", \"d\"} (monotone)",
            ),
            ("f3", "factor on x1, same shape as f1"),
        ],
        example: r#"{"k1": 1, "k2": 1, "f1": {"z0": 1, "x0": 0}, "f3": {"z0": 1, "eta": 1, "d": 1}}"#,
        example_box: "-0.3,0.3:-0.3,0.3:-0.3,0.3",
    },
    KindInfo {
        kind: T2_9_1,
        id: "T2_9_1",
        shape: "f1(x2), f2(x1), f3(x3)",
        form: "f1 = k1; f2 = k2; f3 free",
        params: &[k!("k1"), k!("k2"), F3_FREE_DEFAULT],
        example: r#"{"k1": 1, "k2": 3, "f3": "2 + x3"}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_9_2,
        id: "T2_9_2",
        shape: "f1(x2), f2(x1), f3(x3)",
        form: "f1 = k1/(x2 - c1); f2 = k2; f3 free",
        params: &[k!("k1"), c_out!("c1", "2"), k!("k2", default), F3_FREE_DEFAULT],
        example: r#"{"k1": 1, "c1": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_9_3,
        id: "T2_9_3",
        shape: "f1(x2), f2(x1), f3(x3)",
        form: "f1 = k1; f2 = k2/(x1 - c2); f3 free",
        params: &[k!("k1", default), k!("k2"), c_out!("c2", "1"), F3_FREE_DEFAULT],
        example: r#"{"k2": 1, "c2": -2, "f3": "exp(x3)"}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_9_4,
        id: "T2_9_4",
        shape: "f1(x2), f2(x1), f3(x3)",
        form: "f1 = k1/(x2 - c1); f2 = k2/(x1 - c2); f3 free",
        params: &[
            k!("k1"),
            c_out!("c1", "2"),
            k!("k2"),
            c_out!("c2", "1"),
            F3_FREE_DEFAULT,
        ],
        example: r#"{"k1": 1, "c1": 2, "k2": -1, "c2": -2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T2_9_5,
        id: "T2_9_5",
        shape: "f1(x2), f2(x1), f3(x3)",
        form: "f1 = 1/g1(x2), f2 = 1/g2(x1) with g_i g_i'' = -k_i, k2 = -k1; f3 free",
        params: &[
            k!("k1"),
            (
                "f1",
                "factor on x2: {\"z0\", \"x0\"} (glued) or {\"z0\", \"eta\", \"d\"} (monotone)",
            ),
            ("f2", "factor on x1, same shape as f1"),
            F3_FREE_DEFAULT,
        ],
        example: r#"{"k1": -1, "f1": {"z0": 1, "x0": 0}, "f2": {"z0": -1, "x0": 0.1}}"#,
        example_box: "-0.3,0.3:-0.3,0.3:-0.3,0.3",
    },
    KindInfo {
        kind: T3_1,
        id: "T3_1",
        shape: "warped I1 x_w (I2 x I3): f1 = 1, f2 = f3 = f(x1)",
        form: "f1 = 1; f2 = f3 = k (the warping function 1/f must be constant)",
        params: &[k!("k")],
        example: r#"{"k": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_3,
        id: "T3_3",
        shape: "warped (I1 x I2) x_w I3: f1 = f2 = 1, f3(x1, x2)",
        form: "f1 = f2 = 1; f3 = 1/w, w = c1 x1 + c2 x2 + c3 nowhere zero on I1 x I2",
        params: &[("c1", "constant"), ("c2", "constant"), ("c3", "constant")],
        example: r#"{"c1": 1, "c2": 1, "c3": 0}"#,
        example_box: "0,2:0,2:0,1",
    },
    KindInfo {
        kind: T3_5_1,
        id: "T3_5_1",
        shape: "biwarped I1 x_w2 I2 x_w3 I3: f1 = 1, f2(x1), f3(x1)",
        form: "f1 = 1; f2 = k2; f3 = k3",
        params: &[k!("k2"), k!("k3")],
        example: r#"{"k2": 1, "k3": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_5_2,
        id: "T3_5_2",
        shape: "biwarped I1 x_w2 I2 x_w3 I3: f1 = 1, f2(x1), f3(x1)",
        form: "f1 = 1; f2 = k2; f3 = k3/(x1 - c3)",
        params: &[k!("k2", default), k!("k3"), c_out!("c3", "1")],
        example: r#"{"k3": 1, "c3": -1}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_5_3,
        id: "T3_5_3",
        shape: "biwarped I1 x_w2 I2 x_w3 I3: f1 = 1, f2(x1), f3(x1)",
        form: "f1 = 1; f2 = k2/(x1 - c2); f3 = k3",
        params: &[k!("k2"), c_out!("c2", "1"), k!("k3", default)],
        example: r#"{"k2": 1, "c2": 1}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_7_1,
        id: "T3_7_1",
        shape: "sequential (I1 x_w2 I2) x_w3 I3: f1 = 1, f2(x1), f3(x1, x2)",
        form: "f1 = 1; f2 = k2; f3 = k3",
        params: &[k!("k2"), k!("k3")],
        example: r#"{"k2": 1, "k3": 1}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_7_2,
        id: "T3_7_2",
        shape: "sequential (I1 x_w2 I2) x_w3 I3: f1 = 1, f2(x1), f3(x1, x2)",
        form: "f1 = 1; f2 = k2; f3 = k3/(x1 - c3)",
        params: &[k!("k2", default), k!("k3"), c_out!("c3", "1")],
        example: r#"{"k3": 1, "c3": 2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_7_3,
        id: "T3_7_3",
        shape: "sequential (I1 x_w2 I2) x_w3 I3: f1 = 1, f2(x1), f3(x1, x2)",
        form: "f1 = 1; f2 = k2; f3 = k3/(x2 - c3)",
        params: &[k!("k2", default), k!("k3"), c_out!("c3", "2")],
        example: r#"{"k3": 1, "c3": -2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_7_4,
        id: "T3_7_4",
        shape: "sequential (I1 x_w2 I2) x_w3 I3: f1 = 1, f2(x1), f3(x1, x2)",
        form: "f1 = 1; f2 = k2; f3 = k3/(c1 x1 + x2 + c2), denominator nowhere zero on I1 x I2",
        params: &[k!("k2", default), k!("k3"), k!("c1"), ("c2", "constant")],
        example: r#"{"k3": 1, "c1": 1, "c2": 3}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_7_5,
        id: "T3_7_5",
        shape: "sequential (I1 x_w2 I2) x_w3 I3: f1 = 1, f2(x1), f3(x1, x2)",
        form: "f1 = 1; f2 = k2/(x1 - c2); f3 = k3",
        params: &[k!("k2"), c_out!("c2", "1"), k!("k3", default)],
        example: r#"{"k2": 1, "c2": -2}"#,
        example_box: "-1,1:-1,1:-1,1",
    },
    KindInfo {
        kind: T3_7_6,
        id: "T3_7_6",
        shape: "sequential (I1 x_w2 I2) x_w3 I3: f1 = 1, f2(x1), f3(x1, x2)",
        form: "f1 = 1; f2 = k2/(x1 - c2); f3 = k3/((x1 - c2) cos(x2/k2 - c3)), |x2/k2 - c3| < pi/2 on I2",
        params: &[k!("k2"), c_out!("c2", "1"), k!("k3"), ("c3", "constant")],
        example: r#"{"k2": 1, "k3": 1, "c2": -1, "c3": 0}"#,
        example_box: "0,2:-1.5,1.5:0,1",
    },
    KindInfo {
        kind: T3_7_7,
        id: "T3_7_7",
        shape: "sequential (I1 x_w2 I2) x_w3 I3: f1 = 1, f2(x1), f3(x1, x2)",
        form: "f1 = 1; f2 = k2/(x1 - c2); f3 = k3/(1 + c1 (x1 - c2) cos(x2/k2 - c3)), denominator nowhere zero",
        params: &[k!("c1"), k!("k2"), c_out!("c2", "1"), k!("k3"), ("c3", "constant")],
        example: r#"{"c1": 0.2, "k2": 1, "k3": 1, "c2": -1, "c3": 0}"#,
        example_box: "0,2:-1.5,1.5:0,1",
    },
    KindInfo {
        kind: T3_8,
        id: "T3_8",
        shape: "doubly warped _w(I1 x I2) x_w3 I3: f1 = f2 = f(x3), f3(x1, x2)",
        form: "f1 = f2 = k; f3 = 1/(c1 x1 + c2 x2 + c3) nowhere zero on I1 x I2",
        params: &[k!("k"), ("c1", "constant"), ("c2", "constant"), ("c3", "constant")],
        example: r#"{"k": 2, "c1": 1, "c2": 0.5, "c3": 1}"#,
        example_box: "0,1:0,1:0,1",
    },
];

impl Kind {
    pub const ALL: [Kind; 37] = {
        let mut out = [T2_1_2; 37];
        let mut i = 0;
        while i < 37 {
            out[i] = CATALOG[i].kind;
            i += 1;
        }
        out
    };

    pub fn info(self) -> &'static KindInfo {
        CATALOG
            .iter()
            .find(|k| k.kind == self)
            .expect("every kind is catalogued")
    }

    pub fn id(self) -> &'static str {
        self.info().id
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CATALOG
            .iter()
            .find(|k| k.id == s)
            .map(|k| k.kind)
            .ok_or_else(|| s.to_string())
    }
}

impl TryFrom<String> for Kind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse().map_err(|s| format!("unknown family kind `{s}`"))
    }
}

impl From<Kind> for String {
    fn from(k: Kind) -> String {
        k.id().to_string()
    }
}
