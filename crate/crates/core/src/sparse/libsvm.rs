use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{LabeledDataset, SparseColumnMatrix};
use crate::error::{Error, Result};

/// Parses LIBSVM / svmlight text: `<label> <idx>:<val> ...` per line.
///
/// Feature indices are 1-based in the file and 0-based in the result. Blank
/// lines and `#` comments are skipped. With `expect_binary_labels`, labels
/// in `{0,1}` or `{1,2}` are mapped to `{-1,+1}`.
pub fn parse_libsvm<R: BufRead>(reader: R, expect_binary_labels: bool) -> Result<LabeledDataset> {
    let mut labels = Vec::new();
    let mut triplets = Vec::new();
    let mut n_cols = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("bad label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(err(format!("non-finite label {label_tok:?}")));
        }
        let row = labels.len();
        labels.push(label);

        let mut prev: usize = 0;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected idx:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("bad feature index in {tok:?}")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("bad feature value in {tok:?}")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            if idx == prev {
                return Err(err(format!("duplicate feature index {idx}")));
            }
            if idx < prev {
                return Err(err(format!("feature index {idx} after {prev}")));
            }
            if !val.is_finite() {
                return Err(err(format!("non-finite value in {tok:?}")));
            }
            prev = idx;
            n_cols = n_cols.max(idx);
            triplets.push((row, idx - 1, val));
        }
    }

    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    if expect_binary_labels {
        remap_binary(&mut labels)?;
    }
    let matrix = SparseColumnMatrix::from_triplets(labels.len(), n_cols, &triplets)?;
    LabeledDataset::new(matrix, labels)
}

fn remap_binary(labels: &mut [f64]) -> Result<()> {
    let within = |set: &[f64]| labels.iter().all(|y| set.contains(y));
    if within(&[-1.0, 1.0]) {
        return Ok(());
    }
    let negative = if within(&[0.0, 1.0]) {
        0.0
    } else if within(&[1.0, 2.0]) {
        1.0
    } else {
        return Err(Error::InvalidArgument(
            "labels are not binary ({-1,1}, {0,1} or {1,2})".into(),
        ));
    };
    for y in labels.iter_mut() {
        *y = if *y == negative { -1.0 } else { 1.0 };
    }
    Ok(())
}

pub fn read_libsvm_file(path: &Path, expect_binary_labels: bool) -> Result<LabeledDataset> {
    let file = File::open(path)?;
    parse_libsvm(BufReader::new(file), expect_binary_labels)
}

/// Writes the dataset back in LIBSVM format (1-based indices, shortest
/// round-trip float formatting).
pub fn write_libsvm<W: Write>(data: &LabeledDataset, mut out: W) -> Result<()> {
    for (label, row) in data.labels.iter().zip(data.matrix.rows()) {
        write!(out, "{label}")?;
        for (j, v) in row {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str, binary: bool) -> Result<LabeledDataset> {
        parse_libsvm(text.as_bytes(), binary)
    }

    #[test]
    fn transcribes_rows_into_columns() {
        let d = parse("1 1:2.0 3:1.0\n-1 2:4.0", false).unwrap();
        assert_eq!(d.labels, vec![1.0, -1.0]);
        assert_eq!(
            d.matrix.to_dense(),
            vec![vec![2.0, 0.0, 1.0], vec![0.0, 4.0, 0.0]]
        );
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse("", false), Err(Error::EmptyInput)));
        assert!(matches!(
            parse("\n  \n# only a comment\n", false),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn remaps_zero_one_labels() {
        let d = parse("0 5:1 12:1\n1 1:1", true).unwrap();
        assert_eq!(d.labels, vec![-1.0, 1.0]);
        assert_eq!(d.matrix.n_cols(), 12);
        let row0 = &d.matrix.rows()[0];
        assert_eq!(row0, &vec![(4, 1.0), (11, 1.0)]);
    }

    #[test]
    fn remaps_one_two_labels_and_keeps_plus_minus_one() {
        assert_eq!(parse("1 1:1\n2 1:1", true).unwrap().labels, vec![-1.0, 1.0]);
        assert_eq!(
            parse("-1 1:1\n1 1:1", true).unwrap().labels,
            vec![-1.0, 1.0]
        );
        assert!(parse("3 1:1\n1 1:1", true).is_err());
        // regression targets pass through untouched
        assert_eq!(parse("3.5 1:1", false).unwrap().labels, vec![3.5]);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let cases = [
            ("1 1:2\nx 1:1", 2),
            ("1 1:2\n1 3:1 2:1", 2),
            ("1 2:1 2:1", 1),
            ("1 1-2", 1),
            ("1 0:1", 1),
            ("\n\n1 1:abc", 3),
        ];
        for (text, line) in cases {
            match parse(text, false) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn feature_count_override_pads_columns() {
        let d = parse("1 2:1", false).unwrap();
        let m = d.matrix.with_n_cols(5).unwrap();
        assert_eq!(m.n_cols(), 5);
        assert_eq!(m.col_nnz(4), 0);
        assert!(m.with_n_cols(1).is_err());
    }

    fn dataset_strategy() -> impl Strategy<Value = LabeledDataset> {
        (1usize..6, 1usize..6).prop_flat_map(|(n, d)| {
            (
                prop::collection::vec(prop::collection::vec(-1e3f64..1e3, d), n),
                prop::collection::vec(prop::collection::vec(any::<bool>(), d), n),
                prop::collection::vec(-5.0f64..5.0, n),
            )
                .prop_map(move |(vals, mask, labels)| {
                    let dense: Vec<Vec<f64>> = vals
                        .iter()
                        .zip(&mask)
                        .map(|(r, m)| {
                            r.iter()
                                .zip(m)
                                .map(|(&v, &k)| if k { v } else { 0.0 })
                                .collect()
                        })
                        .collect();
                    let matrix = SparseColumnMatrix::from_dense(&dense).unwrap();
                    LabeledDataset::new(matrix, labels).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(data in dataset_strategy()) {
            let mut buf = Vec::new();
            write_libsvm(&data, &mut buf).unwrap();
            let back = parse_libsvm(&buf[..], false).unwrap();
            // trailing empty columns are not representable in the format
            let back_matrix = back.matrix.clone().with_n_cols(data.matrix.n_cols()).unwrap();
            prop_assert_eq!(&back.labels, &data.labels);
            prop_assert_eq!(back_matrix, data.matrix);
        }
    }
}
