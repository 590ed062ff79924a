//! Invocation logs as CSV.

use std::io::{Read, Write};

use cosmos_core::telemetry::{Status, UsageRecord};
use cosmos_core::Decimal;

pub const HEADER: [&str; 7] = [
    "timestamp",
    "function_id",
    "platform_id",
    "duration_ms",
    "bytes_in",
    "bytes_out",
    "status",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {cause}")]
pub struct RowError {
    pub line: u64,
    pub cause: String,
}

#[derive(Debug, thiserror::Error)]
pub enum UsageLogError {
    #[error("header must be `{}`, found `{found}`", HEADER.join(","))]
    Header { found: String },
    #[error("{} malformed row(s): {}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Rows(Vec<RowError>),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn parse_row(row: &csv::StringRecord) -> Result<UsageRecord, String> {
    if row.len() != HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            HEADER.len(),
            row.len()
        ));
    }
    let timestamp = &row[0];
    chrono::DateTime::parse_from_rfc3339(timestamp)
        .map_err(|e| format!("timestamp `{timestamp}` is not an ISO-8601 instant ({e})"))?;
    let nonempty = |i: usize| {
        if row[i].is_empty() {
            Err(format!("{} is empty", HEADER[i]))
        } else {
            Ok(row[i].to_string())
        }
    };
    let duration: Decimal = row[3]
        .parse()
        .map_err(|_| format!("duration_ms `{}` is not a number", &row[3]))?;
    if duration.is_sign_negative() && !duration.is_zero() {
        return Err(format!("duration_ms {duration} is negative"));
    }
    let bytes = |i: usize| {
        row[i]
            .parse::<u64>()
            .map_err(|_| format!("{} `{}` is not a non-negative integer", HEADER[i], &row[i]))
    };
    Ok(UsageRecord {
        timestamp: timestamp.to_string(),
        function_id: nonempty(1)?,
        platform_id: nonempty(2)?,
        duration_ms: duration,
        bytes_in: bytes(4)?,
        bytes_out: bytes(5)?,
        status: row[6]
            .parse::<Status>()
            .map_err(|_| format!("status `{}` is neither ok nor error", &row[6]))?,
    })
}

/// Reads every record in file order. Rows that fail to parse are all reported
/// together.
pub fn parse_usage_log(source: impl Read) -> Result<Vec<UsageRecord>, UsageLogError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(UsageLogError::Header {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row) {
            Ok(r) => records.push(r),
            Err(cause) => errors.push(RowError { line, cause }),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(UsageLogError::Rows(errors))
    }
}

pub fn write_usage_log(records: &[UsageRecord], sink: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.timestamp.as_str(),
            &r.function_id,
            &r.platform_id,
            &r.duration_ms.to_string(),
            &r.bytes_in.to_string(),
            &r.bytes_out.to_string(),
            r.status.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "timestamp,function_id,platform_id,duration_ms,bytes_in,bytes_out,status\n";

    #[test]
    fn three_rows() {
        let text = format!(
            "{HEAD}2024-05-06T10:00:00Z,retrieval,aws-x86,230,1,2,ok\n\
             2024-05-06T10:00:01Z,retrieval,aws-x86,231.5,1,2,ok\n\
             2024-05-06T10:00:02+02:00,retrieval,aws-x86,232,1,2,error\n"
        );
        let records = parse_usage_log(text.as_bytes()).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[1].duration_ms, "231.5".parse().unwrap());
        assert_eq!(records[2].status, Status::Error);
    }

    #[test]
    fn empty_body() {
        assert!(parse_usage_log(HEAD.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn negative_duration_names_the_line() {
        let text = format!(
            "{HEAD}2024-05-06T10:00:00Z,f,p,1,0,0,ok\n2024-05-06T10:00:00Z,f,p,-5,0,0,ok\n"
        );
        match parse_usage_log(text.as_bytes()) {
            Err(UsageLogError::Rows(errors)) => {
                assert_eq!(errors.len(), 1);
                assert_eq!(errors[0].line, 3);
            }
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn every_bad_row_is_reported() {
        let text = format!(
            "{HEAD}yesterday,f,p,1,0,0,ok\n2024-05-06T10:00:00Z,f,p,1,-1,0,ok\n2024-05-06T10:00:00Z,f,p,1,0,0,maybe\n2024-05-06T10:00:00Z,f,p\n"
        );
        match parse_usage_log(text.as_bytes()) {
            Err(UsageLogError::Rows(errors)) => {
                assert_eq!(
                    errors.iter().map(|e| e.line).collect::<Vec<_>>(),
                    [2, 3, 4, 5]
                );
            }
            other => panic!("expected row errors, got {other:?}"),
        }
    }

    #[test]
    fn header_must_match() {
        let text = "time,function_id,platform_id,duration_ms,bytes_in,bytes_out,status\n";
        assert!(matches!(
            parse_usage_log(text.as_bytes()),
            Err(UsageLogError::Header { .. })
        ));
    }

    #[test]
    fn round_trip() {
        let text = format!("{HEAD}2024-05-06T10:00:00Z,\"fn,quoted\",p,0.125,10,20,ok\n");
        let records = parse_usage_log(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_usage_log(&records, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }
}
