//! Plain, JSON and CSV rendering to stdout.

use std::io::{self, Write};

use serde::Serialize;
use welschinger_core::Error;

use crate::Failure;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Plain,
    Json,
    Csv,
}

pub struct Out {
    format: Format,
    buf: Vec<u8>,
}

impl Out {
    pub fn new(format: Format) -> Self {
        Self {
            format,
            buf: Vec::new(),
        }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn line(&mut self, s: String) {
        self.buf.extend_from_slice(s.as_bytes());
        self.buf.push(b'\n');
    }

    /// A remark for the reader; kept off stdout when stdout is structured.
    pub fn note(&mut self, s: &str) {
        if self.format == Format::Plain {
            self.line(format!("note: {s}"));
        } else {
            eprintln!("note: {s}");
        }
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, v: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(v)
            .map_err(|e| Failure::Core(Error::Internal(format!("json: {e}"))))?;
        self.line(text);
        Ok(())
    }

    pub fn rows<T: Serialize>(&mut self, rows: &[T]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(csv_error)?;
        }
        self.finish_csv(w)
    }

    pub fn records(&mut self, rows: &[Vec<String>]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.write_record(r).map_err(csv_error)?;
        }
        self.finish_csv(w)
    }

    fn finish_csv(&mut self, w: csv::Writer<Vec<u8>>) -> Result<(), Failure> {
        let bytes = w
            .into_inner()
            .map_err(|e| Failure::Core(Error::Internal(format!("csv: {e}"))))?;
        self.buf.extend_from_slice(&bytes);
        Ok(())
    }

    pub fn flush(&mut self) {
        let mut stdout = io::stdout().lock();
        let _ = stdout.write_all(&self.buf);
        let _ = stdout.flush();
        self.buf.clear();
    }
}

fn csv_error(e: csv::Error) -> Failure {
    Failure::Core(Error::Internal(format!("csv: {e}")))
}
