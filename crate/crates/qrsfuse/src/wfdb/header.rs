//! `.hea` text header parsing.

use crate::{Error, Result};

/// Per-signal description from a header line.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub file_name: String,
    pub format: u32,
    /// ADC units per millivolt. Defaults to 200 when the field is absent.
    /// An explicit 0 is kept literal and rejected at conversion time.
    pub gain: f64,
    /// ADC value corresponding to 0 mV. Defaults to the ADC-zero field, then 0.
    pub baseline: i32,
    pub description: String,
}

/// Parsed record header.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub name: String,
    pub num_signals: usize,
    pub fs: f64,
    pub num_samples: usize,
    pub signals: Vec<SignalSpec>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses header text: one record line, then one line per signal.
/// Comment lines (starting with `#`) and blank lines are skipped.
pub fn parse_header(text: &str) -> Result<RecordHeader> {
    // (1-based line number, content) for every meaningful line
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (rec_no, rec_line) = lines.next().ok_or_else(|| err(1, "empty header"))?;
    let fields: Vec<&str> = rec_line.split_whitespace().collect();
    if fields.len() < 4 {
        return Err(err(
            rec_no,
            format!(
                "record line needs name, signal count, sampling rate, sample count; got {} fields",
                fields.len()
            ),
        ));
    }
    let name = fields[0].to_string();
    if name.contains('/') {
        return Err(err(rec_no, "multi-segment records are not supported"));
    }
    let num_signals: usize = fields[1]
        .parse()
        .map_err(|_| err(rec_no, format!("bad signal count {:?}", fields[1])))?;
    // The rate field may carry a counter frequency after '/'; only the leading
    // number matters here.
    let fs_token = fields[2].split('/').next().unwrap_or("");
    let fs: f64 = fs_token
        .parse()
        .map_err(|_| err(rec_no, format!("bad sampling rate {:?}", fields[2])))?;
    let num_samples: usize = fields[3]
        .parse()
        .map_err(|_| err(rec_no, format!("bad sample count {:?}", fields[3])))?;

    if num_signals == 0 {
        return Err(Error::InvalidHeader("record declares zero signals".into()));
    }
    if !(fs > 0.0) {
        return Err(Error::InvalidHeader(format!(
            "sampling rate must be positive, got {fs}"
        )));
    }
    if num_samples == 0 {
        return Err(Error::InvalidHeader("record declares zero samples".into()));
    }

    let mut signals = Vec::with_capacity(num_signals);
    for _ in 0..num_signals {
        let (no, line) = lines.next().ok_or_else(|| {
            err(
                rec_no,
                format!(
                    "header declares {num_signals} signals but has only {} signal lines",
                    signals.len()
                ),
            )
        })?;
        signals.push(parse_signal_line(no, line)?);
    }

    Ok(RecordHeader {
        name,
        num_signals,
        fs,
        num_samples,
        signals,
    })
}

fn parse_signal_line(no: usize, line: &str) -> Result<SignalSpec> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 2 {
        return Err(err(no, "signal line needs at least file name and format"));
    }
    let file_name = fields[0].to_string();
    let format: u32 = fields[1].parse().map_err(|_| {
        err(
            no,
            format!(
                "bad or modified format field {:?} (skew/offset unsupported)",
                fields[1]
            ),
        )
    })?;

    // Gain field: gain[(baseline)][/units]
    let mut gain = 200.0;
    let mut paren_baseline: Option<i32> = None;
    if let Some(tok) = fields.get(2) {
        let tok = tok.split('/').next().unwrap_or("");
        let (gain_part, base_part) = match tok.find('(') {
            Some(p) => {
                let close = tok
                    .find(')')
                    .ok_or_else(|| err(no, format!("unclosed baseline in {tok:?}")))?;
                (&tok[..p], Some(&tok[p + 1..close]))
            }
            None => (tok, None),
        };
        gain = gain_part
            .parse()
            .map_err(|_| err(no, format!("bad gain field {tok:?}")))?;
        if let Some(b) = base_part {
            paren_baseline = Some(
                b.parse()
                    .map_err(|_| err(no, format!("bad baseline in {tok:?}")))?,
            );
        }
    }
    // Field 3 is ADC resolution (unused); field 4 is ADC zero, the baseline
    // fallback. Everything from field 8 on is the free-text description.
    let adc_zero: i32 = match fields.get(4) {
        Some(t) => t
            .parse()
            .map_err(|_| err(no, format!("bad adc-zero field {t:?}")))?,
        None => 0,
    };
    let baseline = paren_baseline.unwrap_or(adc_zero);
    let description = if fields.len() > 8 {
        fields[8..].join(" ")
    } else {
        String::new()
    };

    Ok(SignalSpec {
        file_name,
        format,
        gain,
        baseline,
        description,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INCART_STYLE: &str = "\
I01 12 257 462600
I01.dat 212 1000/mV 12 0 -100 0 0 I
I01.dat 212 1000/mV 12 0 -22 0 0 II
I01.dat 212 1000/mV 12 0 78 0 0 III
I01.dat 212 1000/mV 12 0 61 0 0 AVR
I01.dat 212 1000/mV 12 0 -89 0 0 AVL
I01.dat 212 1000/mV 12 0 28 0 0 AVF
I01.dat 212 1000/mV 12 0 -400 0 0 V1
I01.dat 212 1000/mV 12 0 -92 0 0 V2
I01.dat 212 1000/mV 12 0 23 0 0 V3
I01.dat 212 1000/mV 12 0 196 0 0 V4
I01.dat 212 1000/mV 12 0 343 0 0 V5
I01.dat 212 1000/mV 12 0 195 0 0 V6
";

    #[test]
    fn parses_full_12_lead_header() {
        let h = parse_header(INCART_STYLE).unwrap();
        assert_eq!(h.name, "I01");
        assert_eq!(h.num_signals, 12);
        assert_eq!(h.fs, 257.0);
        assert_eq!(h.num_samples, 462600);
        assert_eq!(h.signals.len(), 12);
        assert_eq!(h.signals[0].gain, 1000.0);
        // field 5 is the initial value, not the baseline; ADC zero (field 4) is 0
        assert_eq!(h.signals[6].baseline, 0);
        assert_eq!(h.signals[6].description, "V1");
        assert_eq!(h.signals[0].format, 212);
    }

    #[test]
    fn parses_minimal_header_with_defaults() {
        // a header with no signal lines must fail
        assert!(parse_header("MO1_001 15 500 5000\n").is_err());

        let text = "MO1_001 15 500 5000\n".to_string() + &"MO1_001.dat 16\n".repeat(15);
        let h = parse_header(&text).unwrap();
        assert_eq!(h.num_signals, 15);
        assert_eq!(h.fs, 500.0);
        assert_eq!(h.num_samples, 5000);
        // gain defaults to 200, baseline to 0
        assert_eq!(h.signals[3].gain, 200.0);
        assert_eq!(h.signals[3].baseline, 0);
    }

    #[test]
    fn baseline_in_parens_overrides_adc_zero() {
        let text = "r 1 360 100\nr.dat 212 200(-50)/mV 12 99 0 0 0 MLII\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.signals[0].gain, 200.0);
        assert_eq!(h.signals[0].baseline, -50);
        assert_eq!(h.signals[0].description, "MLII");
    }

    #[test]
    fn adc_zero_is_the_baseline_fallback() {
        let text = "r 1 360 100\nr.dat 212 200/mV 12 -400 0 0 0 V1\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.signals[0].baseline, -400);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# created by hand\n\nr 1 250 10\n# signal below\nr.dat 16 100\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.fs, 250.0);
        assert_eq!(h.signals[0].gain, 100.0);
    }

    #[test]
    fn missing_fields_report_line_numbers() {
        let e = parse_header("r 1 250\n").unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }

        let e = parse_header("r 1 250 10\nr.dat\n").unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_degenerate_counts_and_rates() {
        assert!(matches!(
            parse_header("r 0 250 10\n"),
            Err(Error::InvalidHeader(_))
        ));
        assert!(matches!(
            parse_header("r 1 0 10\nr.dat 16\n"),
            Err(Error::InvalidHeader(_))
        ));
        assert!(matches!(
            parse_header("r 1 250 0\nr.dat 16\n"),
            Err(Error::InvalidHeader(_))
        ));
    }

    #[test]
    fn fractional_and_counter_rates_parse() {
        let text = "r 1 257.5/1000 10\nr.dat 16 200\n";
        let h = parse_header(text).unwrap();
        assert_eq!(h.fs, 257.5);
    }
}
