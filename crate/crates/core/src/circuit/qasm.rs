use std::fmt::Write;

use super::{Circuit, CircuitError, GateKind};

const SQRT_H_DEF: &str = "gate sqrth a { ry(-pi/4) a; rz(pi/2) a; ry(pi/4) a; }";
const RZX_DEF: &str = "gate rzx(theta) a,b { h b; cx a,b; rz(theta) b; cx a,b; h b; }";

/// Formats an angle with 17 significant digits, like C's `%.17g`, keeping
/// a decimal point in any exponent form so the token is an OpenQASM real.
pub fn format_angle(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.16e}", value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let mantissa = if mantissa.contains('.') { mantissa } else { format!("{mantissa}.0") };
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_fraction(&format!("{:.*}", decimals, value))
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Emits OpenQASM 2.0 text for `circuit` with angles bound from `params`.
///
/// Output is a pure function of the inputs.
pub fn emit_qasm(circuit: &Circuit, params: &[f64]) -> Result<String, CircuitError> {
    circuit.check_params(params)?;
    let uses = |k: GateKind| circuit.instructions().iter().any(|i| i.kind == k);

    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    if uses(GateKind::SqrtH) {
        out.push_str(SQRT_H_DEF);
        out.push('\n');
    }
    if uses(GateKind::Rzx) {
        out.push_str(RZX_DEF);
        out.push('\n');
    }
    let _ = writeln!(out, "qreg q[{}];", circuit.n_qubits());
    for ins in circuit.instructions() {
        out.push_str(ins.kind.qasm_name());
        let angles = ins.angles(params);
        if !angles.is_empty() {
            let joined: Vec<String> = angles.iter().map(|&a| format_angle(a)).collect();
            let _ = write!(out, "({})", joined.join(","));
        }
        let operands: Vec<String> = ins.qubits.iter().map(|q| format!("q[{q}]")).collect();
        let _ = writeln!(out, " {};", operands.join(","));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{decode, AnsatzGenome, CircuitBuilder};

    #[test]
    fn angle_formatting() {
        assert_eq!(format_angle(std::f64::consts::FRAC_PI_2), "1.5707963267948966");
        assert_eq!(format_angle(0.0), "0");
        assert_eq!(format_angle(-2.0), "-2");
        assert_eq!(format_angle(0.1), "0.10000000000000001");
        assert_eq!(format_angle(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_angle(2.5e20), "2.5e+20");
        for v in [0.1, -3.7, 1e-9, 123456.789, std::f64::consts::PI] {
            assert_eq!(format_angle(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn single_ry_line() {
        let mut b = CircuitBuilder::new(1);
        b.push(GateKind::Ry, &[0]).unwrap();
        let text = emit_qasm(&b.build(), &[1.5707963267948966]).unwrap();
        assert!(text.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
        assert!(text.contains("qreg q[1];"));
        assert!(text.contains("ry(1.5707963267948966) q[0];"));
    }

    #[test]
    fn block_order_is_preserved() {
        let c = decode(&AnsatzGenome::from_tuples(&[(1, (0, 1))]), 2).unwrap();
        let text = emit_qasm(&c, &[0.0; 3]).unwrap();
        let gates: Vec<&str> = text
            .lines()
            .skip(3)
            .map(|l| l.split(['(', ' ']).next().unwrap())
            .collect();
        assert_eq!(gates, vec!["rzz", "ry", "ry"]);
    }

    #[test]
    fn custom_gates_are_defined_only_when_used() {
        let c = decode(&AnsatzGenome::from_tuples(&[(3, (0, 1))]), 2).unwrap();
        let text = emit_qasm(&c, &[0.3, 0.4]).unwrap();
        assert!(text.contains("gate rzx(theta)"));
        assert!(!text.contains("gate sqrth"));
        assert!(text.contains("rzx(0.29999999999999999) q[0],q[1];"));
    }

    #[test]
    fn parameter_length_checked() {
        let c = decode(&AnsatzGenome::from_tuples(&[(1, (0, 1))]), 2).unwrap();
        assert_eq!(
            emit_qasm(&c, &[0.0]),
            Err(CircuitError::ParamCountMismatch { expected: 3, actual: 1 })
        );
    }
}
