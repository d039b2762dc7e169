//! Strict CSV ingestion and emission for stream matrices and weight tables.
//!
//! Stream matrix layout: header `artist,<user-id>,...`, then one row per
//! artist of `<artist-id>,<count>,...` with nonnegative integer counts.
//! Ids may not contain commas, so plain splitting round-trips exactly.

use std::fs;
use std::path::Path;

use streamclaims::StreamingProblem;

use crate::error::CliError;

pub fn parse_streams_csv(path: &Path) -> Result<StreamingProblem, CliError> {
    let text =
        fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    parse_streams_text(&text, path)
}

fn split_line(line: &str) -> Vec<&str> {
    line.trim_end_matches('\r').split(',').collect()
}

fn parse_count(cell: &str) -> Option<u64> {
    if cell.is_empty() || !cell.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    cell.parse().ok()
}

pub fn parse_streams_text(text: &str, path: &Path) -> Result<StreamingProblem, CliError> {
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::parse(path, 1, 1, "empty file"))?;
    let header_cells = split_line(header);
    if header_cells[0] != "artist" {
        return Err(CliError::parse(
            path,
            1,
            1,
            format!("header must start with 'artist', got {:?}", header_cells[0]),
        ));
    }
    if header_cells.len() < 2 {
        return Err(CliError::parse(path, 1, 1, "header names no users"));
    }
    let users: Vec<String> = header_cells[1..].iter().map(|s| s.to_string()).collect();

    let mut artists = Vec::new();
    let mut rows = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        if line.trim_end_matches('\r').is_empty() {
            return Err(CliError::parse(path, line_no, 1, "empty row"));
        }
        let cells = split_line(line);
        if cells.len() != users.len() + 1 {
            return Err(CliError::parse(
                path,
                line_no,
                cells.len(),
                format!("expected {} cells, found {}", users.len() + 1, cells.len()),
            ));
        }
        artists.push(cells[0].to_string());
        let mut row = Vec::with_capacity(users.len());
        for (offset, cell) in cells[1..].iter().enumerate() {
            let count = parse_count(cell).ok_or_else(|| {
                CliError::parse(
                    path,
                    line_no,
                    offset + 2,
                    format!("{cell:?} is not a nonnegative integer"),
                )
            })?;
            row.push(count);
        }
        rows.push(row);
    }

    Ok(StreamingProblem::new(artists, users, rows)?)
}

pub fn format_streams_csv(problem: &StreamingProblem) -> String {
    let mut out = String::from("artist");
    for user in problem.users() {
        out.push(',');
        out.push_str(user);
    }
    out.push('\n');
    for (i, artist) in problem.artists().iter().enumerate() {
        out.push_str(artist);
        for &count in problem.artist_row(i) {
            out.push(',');
            out.push_str(&count.to_string());
        }
        out.push('\n');
    }
    out
}

/// Reads a `user,weight` table and returns weights aligned with the
/// problem's user order. Every user must be covered exactly once with a
/// positive weight; unknown users are rejected.
pub fn parse_weights_csv(path: &Path, problem: &StreamingProblem) -> Result<Vec<f64>, CliError> {
    let text =
        fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::parse(path, 1, 1, "empty file"))?;
    if split_line(header) != ["user", "weight"] {
        return Err(CliError::parse(path, 1, 1, "header must be 'user,weight'"));
    }

    let mut weights: Vec<Option<f64>> = vec![None; problem.user_count()];
    for (index, line) in lines {
        let line_no = index + 1;
        if line.trim_end_matches('\r').is_empty() {
            return Err(CliError::parse(path, line_no, 1, "empty row"));
        }
        let cells = split_line(line);
        if cells.len() != 2 {
            return Err(CliError::parse(
                path,
                line_no,
                cells.len(),
                format!("expected 2 cells, found {}", cells.len()),
            ));
        }
        let user = cells[0];
        let position = problem
            .users()
            .iter()
            .position(|candidate| candidate == user)
            .ok_or_else(|| CliError::Invalid(format!("weights file names unknown user {user}")))?;
        let weight: f64 = cells[1].parse().map_err(|_| {
            CliError::parse(path, line_no, 2, format!("{:?} is not a number", cells[1]))
        })?;
        if !weight.is_finite() || weight <= 0.0 {
            return Err(CliError::Invalid(format!(
                "weight of user {user} must be positive, got {weight}"
            )));
        }
        if weights[position].replace(weight).is_some() {
            return Err(CliError::Invalid(format!(
                "weights file lists user {user} twice"
            )));
        }
    }

    weights
        .into_iter()
        .zip(problem.users())
        .map(|(weight, user)| {
            weight.ok_or_else(|| CliError::Invalid(format!("weights file is missing user {user}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn path() -> PathBuf {
        PathBuf::from("test.csv")
    }

    #[test]
    fn parses_a_matrix() {
        let text = "artist,u1,u2\na,10,0\nb,20,0\nc,0,70\n";
        let problem = parse_streams_text(text, &path()).unwrap();
        assert_eq!(problem.artist_count(), 3);
        assert_eq!(problem.user_count(), 2);
        assert_eq!(problem.stream(2, 1), 70);
    }

    #[test]
    fn round_trips_exactly() {
        let text = "artist,u1,u2\na,10,0\nb,20,0\nc,0,70\n";
        let problem = parse_streams_text(text, &path()).unwrap();
        assert_eq!(format_streams_csv(&problem), text);

        let generated = streamclaims::generate_random_problem(11, 5, 7, 30).unwrap();
        let reparsed = parse_streams_text(&format_streams_csv(&generated), &path()).unwrap();
        assert_eq!(generated, reparsed);
    }

    #[test]
    fn rejects_fractional_cell_with_position() {
        let text = "artist,u1\na,1.5\n";
        match parse_streams_text(text, &path()) {
            Err(CliError::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 2);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_cell() {
        let text = "artist,u1\na,-3\n";
        assert!(matches!(
            parse_streams_text(text, &path()),
            Err(CliError::Parse {
                line: 2,
                column: 2,
                ..
            })
        ));
    }

    #[test]
    fn rejects_zero_stream_user_by_name() {
        let text = "artist,u1,dead\na,1,0\n";
        match parse_streams_text(text, &path()) {
            Err(CliError::Core(err)) => assert!(err.to_string().contains("dead")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_header() {
        let text = "a,1\nb,2\n";
        assert!(matches!(
            parse_streams_text(text, &path()),
            Err(CliError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_ragged_row() {
        let text = "artist,u1,u2\na,1\n";
        assert!(matches!(
            parse_streams_text(text, &path()),
            Err(CliError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn accepts_crlf_input() {
        let text = "artist,u1\r\na,3\r\n";
        let problem = parse_streams_text(text, &path()).unwrap();
        assert_eq!(problem.stream(0, 0), 3);
    }
}
