//! Byte-offset to line/column mapping shared by the frontends.

use crate::ir::Span;

/// Precomputed line-start offsets for a source text. Columns are 1-based
/// character counts within the line; byte offsets stay authoritative for
/// slicing.
pub struct LineIndex<'a> {
    src: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub fn new(src: &'a str) -> Self {
        let mut line_starts = vec![0];
        for (i, b) in src.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        LineIndex { src, line_starts }
    }

    /// 1-based (line, col) of a byte offset.
    pub fn position(&self, offset: usize) -> (u32, u32) {
        let line_idx = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let line_start = self.line_starts[line_idx];
        let col = self.src[line_start..offset].chars().count() as u32 + 1;
        (line_idx as u32 + 1, col)
    }

    pub fn span(&self, byte_start: usize, byte_end: usize) -> Span {
        let (start_line, start_col) = self.position(byte_start);
        let (end_line, end_col) = self.position(byte_end);
        Span {
            start_line,
            start_col,
            end_line,
            end_col,
            byte_start,
            byte_end,
        }
    }
}
