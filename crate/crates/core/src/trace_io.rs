//! Trace input and pool output in JSON lines and CSV.
//!
//! JSON lines: `{"name":"e0","time":0,"data":{"d":2}}`, one event per line.
//! CSV: header `name,time,data`, with the data cell written `k=v;k=v` and
//! each `v` a natural number, `true` or `false`.

use std::str::FromStr;

use num_bigint::BigUint;
use serde_json::{Map, Number, Value as Json};

use crate::engine::EvalResult;
use crate::error::TraceError;
use crate::model::{Event, Identifier, Interval, Pool, Time, Trace, Value, ValueMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    /// Guesses from a file name: `.csv` is CSV, anything else JSON lines.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" | "jsonl" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

pub fn parse_trace(source: &str, format: Format) -> Result<Trace, TraceError> {
    match format {
        Format::Json => parse_jsonl(source),
        Format::Csv => parse_csv(source),
    }
}

fn identifier(line: usize, what: &str, name: &str) -> Result<Identifier, TraceError> {
    Identifier::new(name).map_err(|e| TraceError::at(line, format!("{what}: {e}")))
}

fn natural(line: usize, what: &str, text: &str) -> Result<BigUint, TraceError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        let reason = if text.starts_with('-') { "must not be negative" } else { "must be a nonnegative integer" };
        return Err(TraceError::at(line, format!("{what} `{text}` {reason}")));
    }
    Ok(text.parse().expect("decimal digits"))
}

fn time(line: usize, text: &str) -> Result<Time, TraceError> {
    let n = natural(line, "time", text)?;
    Time::try_from(n).map_err(|_| TraceError::at(line, format!("time `{text}` does not fit in 64 bits")))
}

fn parse_jsonl(source: &str) -> Result<Trace, TraceError> {
    let mut events = Vec::new();
    for (n, raw) in source.lines().enumerate() {
        let line = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Json = serde_json::from_str(raw).map_err(|e| TraceError::at(line, format!("invalid JSON: {e}")))?;
        let Json::Object(obj) = value else {
            return Err(TraceError::at(line, "expected an object"));
        };
        if let Some(extra) = obj.keys().find(|k| !matches!(k.as_str(), "name" | "time" | "data")) {
            return Err(TraceError::at(line, format!("unexpected field `{extra}`")));
        }
        let name = match obj.get("name") {
            Some(Json::String(s)) => identifier(line, "name", s)?,
            _ => return Err(TraceError::at(line, "`name` must be a string")),
        };
        let time = match obj.get("time") {
            Some(Json::Number(num)) => time(line, &num.to_string())?,
            _ => return Err(TraceError::at(line, "`time` must be a nonnegative integer")),
        };
        let mut map = ValueMap::new();
        match obj.get("data") {
            None | Some(Json::Null) => {}
            Some(Json::Object(data)) => {
                for (k, v) in data {
                    let key = identifier(line, "data key", k)?;
                    let value = match v {
                        Json::Bool(b) => Value::Bool(*b),
                        Json::Number(num) => Value::Nat(natural(line, &format!("value of `{k}`"), &num.to_string())?),
                        _ => return Err(TraceError::at(line, format!("value of `{k}` must be an integer or a boolean"))),
                    };
                    map.insert(key, value);
                }
            }
            Some(_) => return Err(TraceError::at(line, "`data` must be an object")),
        }
        events.push(Event::new(name, time, map));
    }
    Ok(Trace { events })
}

fn parse_data_cell(line: usize, cell: &str) -> Result<ValueMap, TraceError> {
    let mut map = ValueMap::new();
    for pair in cell.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| TraceError::at(line, format!("data entry `{pair}` is not `key=value`")))?;
        let key = identifier(line, "data key", k.trim())?;
        let value = match v.trim() {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            digits => Value::Nat(natural(line, &format!("value of `{}`", k.trim()), digits)?),
        };
        if map.insert(key, value).is_some() {
            return Err(TraceError::at(line, format!("data key `{}` repeated", k.trim())));
        }
    }
    Ok(map)
}

fn parse_csv(source: &str) -> Result<Trace, TraceError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(source.as_bytes());
    let mut events = Vec::new();
    let headers = reader.headers().map_err(|e| TraceError::at(1, e.to_string()))?.clone();
    if headers.is_empty() || (headers.len() == 1 && &headers[0] == "") {
        return Ok(Trace { events });
    }
    if headers.iter().collect::<Vec<_>>() != ["name", "time", "data"] {
        return Err(TraceError::at(1, "header must be `name,time,data`"));
    }
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            TraceError::at(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 && record.len() != 3 {
            return Err(TraceError::at(line, format!("expected 3 fields, found {}", record.len())));
        }
        let name = identifier(line, "name", &record[0])?;
        let time = time(line, &record[1])?;
        let map = parse_data_cell(line, record.get(2).unwrap_or(""))?;
        events.push(Event::new(name, time, map));
    }
    Ok(Trace { events })
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Bool(b) => Json::Bool(*b),
        Value::Nat(n) => Json::Number(Number::from_str(&n.to_string()).expect("decimal naturals are JSON numbers")),
    }
}

fn map_json(map: &ValueMap) -> Json {
    Json::Object(map.iter().map(|(k, v)| (k.to_string(), value_json(v))).collect::<Map<_, _>>())
}

fn map_cell(map: &ValueMap) -> String {
    map.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// `{"name", "start", "end", "data"}` in that order.
pub fn interval_json(iv: &Interval) -> Json {
    let mut obj = Map::new();
    obj.insert("name".into(), Json::String(iv.id().to_string()));
    obj.insert("start".into(), Json::from(iv.start()));
    obj.insert("end".into(), Json::from(iv.end()));
    obj.insert("data".into(), map_json(iv.map()));
    Json::Object(obj)
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("writing to memory");
    for row in rows {
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flushing to memory")).expect("CSV of UTF-8 fields")
}

/// The pool in canonical order, one interval per line (plus a header for CSV).
pub fn emit_pool(pool: &Pool, format: Format) -> String {
    match format {
        Format::Json => pool.iter().map(|iv| interval_json(iv).to_string() + "\n").collect(),
        Format::Csv => csv_text(
            &["name", "start", "end", "data"],
            pool.iter().map(|iv| vec![iv.id().to_string(), iv.start().to_string(), iv.end().to_string(), map_cell(iv.map())]),
        ),
    }
}

/// Writes a trace in the form [`parse_trace`] reads.
pub fn emit_trace(trace: &Trace, format: Format) -> String {
    match format {
        Format::Json => trace
            .events
            .iter()
            .map(|e| {
                let mut obj = Map::new();
                obj.insert("name".into(), Json::String(e.id.to_string()));
                obj.insert("time".into(), Json::from(e.time));
                obj.insert("data".into(), map_json(&e.map));
                Json::Object(obj).to_string() + "\n"
            })
            .collect(),
        Format::Csv => csv_text(
            &["name", "time", "data"],
            trace.events.iter().map(|e| vec![e.id.to_string(), e.time.to_string(), map_cell(&e.map)]),
        ),
    }
}

/// One line for the diagnostic channel.
pub fn summary(result: &EvalResult) -> String {
    format!("iterations={} saturated={} pool={}", result.iterations, result.saturated(), result.pool.len())
}
