//! Binary wire protocol between the session server and a play client.
//!
//! Every message is `u32 len | u8 type | payload`, little-endian, where
//! `len` counts the type byte plus the payload. One WebSocket binary message
//! carries one or more protocol messages back to back.
//!
//! Server to client:
//!
//! ```text
//! 0x01 frame        u32 tick | u32 timestep | u8 encoding | u16 width | u16 height | data
//! 0x02 episode_end  u8 reason | f64 return | u32 timesteps
//! 0x03 session      u8 mode | u16 len, level id | f64 remaining secs
//!                   | u16 level index | u16 level count | u32 episode
//! 0x04 score        f64 episode return | u32 timestep | u32 finished episodes
//! ```
//!
//! Client to server:
//!
//! ```text
//! 0x10 input        u16 button mask (bits 12-15 must be zero)
//! 0x11 ready
//! 0x12 pause        u8 flag (1 pause, 0 resume)
//! ```

use retrobench::Buttons;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MSG_FRAME: u8 = 0x01;
pub const MSG_EPISODE_END: u8 = 0x02;
pub const MSG_SESSION: u8 = 0x03;
pub const MSG_SCORE: u8 = 0x04;
pub const MSG_INPUT: u8 = 0x10;
pub const MSG_READY: u8 = 0x11;
pub const MSG_PAUSE: u8 = 0x12;

/// WebSocket close code sent after a malformed client message.
pub const CLOSE_PROTOCOL_ERROR: u16 = 1002;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("message truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },

    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),

    #[error("message type 0x{kind:02x} expects {expected} payload bytes, got {found}")]
    BadLength { kind: u8, expected: usize, found: usize },

    #[error("button mask 0x{0:04x} sets reserved bits")]
    InvalidMask(u16),

    #[error("invalid {field} value {value}")]
    InvalidValue { field: &'static str, value: u32 },

    #[error("level id is not valid UTF-8")]
    Utf8,

    #[error("empty message")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameEncoding {
    /// Row-major RGB, three bytes per pixel.
    Raw = 0,
    /// Runs of `u8 count | r | g | b` (count 1..=255) over the raw pixels.
    Rle = 1,
}

impl FrameEncoding {
    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FrameEncoding::Raw),
            1 => Some(FrameEncoding::Rle),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Practice = 0,
    Test = 1,
}

/// Why an episode ended, as sent in `episode_end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndReason {
    Completed = 1,
    LifeLost = 2,
    Timeout = 3,
    /// The level's session time ran out mid-episode.
    OutOfTime = 4,
}

impl EndReason {
    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => EndReason::Completed,
            2 => EndReason::LifeLost,
            3 => EndReason::Timeout,
            4 => EndReason::OutOfTime,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            EndReason::Completed => "completed",
            EndReason::LifeLost => "life_lost",
            EndReason::Timeout => "timeout",
            EndReason::OutOfTime => "out_of_time",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ServerMessage {
    Frame {
        /// Session-wide tick counter, starting at 1.
        tick: u32,
        /// Timestep of the current episode after this tick's step.
        timestep: u32,
        encoding: FrameEncoding,
        width: u16,
        height: u16,
        data: Vec<u8>,
    },
    EpisodeEnd {
        reason: EndReason,
        total_return: f64,
        timesteps: u32,
    },
    Session {
        mode: Mode,
        level: String,
        remaining_secs: f64,
        level_index: u16,
        level_count: u16,
        episode: u32,
    },
    Score {
        episode_return: f64,
        timestep: u32,
        episodes: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClientMessage {
    Input(Buttons),
    Ready,
    Pause(bool),
}

fn frame(kind: u8, payload: &[u8], out: &mut Vec<u8>) {
    out.extend_from_slice(&(payload.len() as u32 + 1).to_le_bytes());
    out.push(kind);
    out.extend_from_slice(payload);
}

impl ServerMessage {
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        let mut p = Vec::new();
        let kind = match self {
            ServerMessage::Frame {
                tick,
                timestep,
                encoding,
                width,
                height,
                data,
            } => {
                p.reserve(13 + data.len());
                p.extend_from_slice(&tick.to_le_bytes());
                p.extend_from_slice(&timestep.to_le_bytes());
                p.push(*encoding as u8);
                p.extend_from_slice(&width.to_le_bytes());
                p.extend_from_slice(&height.to_le_bytes());
                p.extend_from_slice(data);
                MSG_FRAME
            }
            ServerMessage::EpisodeEnd {
                reason,
                total_return,
                timesteps,
            } => {
                p.push(*reason as u8);
                p.extend_from_slice(&total_return.to_le_bytes());
                p.extend_from_slice(&timesteps.to_le_bytes());
                MSG_EPISODE_END
            }
            ServerMessage::Session {
                mode,
                level,
                remaining_secs,
                level_index,
                level_count,
                episode,
            } => {
                p.push(*mode as u8);
                p.extend_from_slice(&(level.len() as u16).to_le_bytes());
                p.extend_from_slice(level.as_bytes());
                p.extend_from_slice(&remaining_secs.to_le_bytes());
                p.extend_from_slice(&level_index.to_le_bytes());
                p.extend_from_slice(&level_count.to_le_bytes());
                p.extend_from_slice(&episode.to_le_bytes());
                MSG_SESSION
            }
            ServerMessage::Score {
                episode_return,
                timestep,
                episodes,
            } => {
                p.extend_from_slice(&episode_return.to_le_bytes());
                p.extend_from_slice(&timestep.to_le_bytes());
                p.extend_from_slice(&episodes.to_le_bytes());
                MSG_SCORE
            }
        };
        frame(kind, &p, out);
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }
}

impl ClientMessage {
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            ClientMessage::Input(b) => frame(MSG_INPUT, &b.mask().to_le_bytes(), out),
            ClientMessage::Ready => frame(MSG_READY, &[], out),
            ClientMessage::Pause(on) => frame(MSG_PAUSE, &[u8::from(*on)], out),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ProtocolError> {
        let have = self.buf.len() - self.pos;
        if have < n {
            return Err(ProtocolError::Truncated { need: n, have });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, ProtocolError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, ProtocolError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, ProtocolError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, ProtocolError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn rest(&mut self) -> &'a [u8] {
        let s = &self.buf[self.pos..];
        self.pos = self.buf.len();
        s
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

/// Splits a buffer into `(type, payload)` pairs.
fn split(buf: &[u8]) -> Result<Vec<(u8, &[u8])>, ProtocolError> {
    if buf.is_empty() {
        return Err(ProtocolError::Empty);
    }
    let mut r = Reader { buf, pos: 0 };
    let mut out = Vec::new();
    while !r.done() {
        let len = r.u32()? as usize;
        if len == 0 {
            return Err(ProtocolError::Empty);
        }
        let body = r.take(len)?;
        out.push((body[0], &body[1..]));
    }
    Ok(out)
}

fn fixed_len(kind: u8, payload: &[u8], expected: usize) -> Result<(), ProtocolError> {
    if payload.len() != expected {
        return Err(ProtocolError::BadLength {
            kind,
            expected,
            found: payload.len(),
        });
    }
    Ok(())
}

/// Decodes every client message in one transport message.
pub fn decode_client(buf: &[u8]) -> Result<Vec<ClientMessage>, ProtocolError> {
    split(buf)?
        .into_iter()
        .map(|(kind, payload)| match kind {
            MSG_INPUT => {
                fixed_len(kind, payload, 2)?;
                let mask = u16::from_le_bytes([payload[0], payload[1]]);
                Buttons::from_mask(mask)
                    .map(ClientMessage::Input)
                    .ok_or(ProtocolError::InvalidMask(mask))
            }
            MSG_READY => {
                fixed_len(kind, payload, 0)?;
                Ok(ClientMessage::Ready)
            }
            MSG_PAUSE => {
                fixed_len(kind, payload, 1)?;
                match payload[0] {
                    0 => Ok(ClientMessage::Pause(false)),
                    1 => Ok(ClientMessage::Pause(true)),
                    v => Err(ProtocolError::InvalidValue {
                        field: "pause flag",
                        value: v as u32,
                    }),
                }
            }
            other => Err(ProtocolError::UnknownType(other)),
        })
        .collect()
}

fn trailing(kind: u8, r: &Reader<'_>, expected: usize) -> Result<(), ProtocolError> {
    if !r.done() {
        return Err(ProtocolError::BadLength {
            kind,
            expected,
            found: r.buf.len(),
        });
    }
    Ok(())
}

/// Decodes every server message in one transport message.
pub fn decode_server(buf: &[u8]) -> Result<Vec<ServerMessage>, ProtocolError> {
    split(buf)?
        .into_iter()
        .map(|(kind, payload)| {
            let mut r = Reader { buf: payload, pos: 0 };
            let msg = match kind {
                MSG_FRAME => {
                    let tick = r.u32()?;
                    let timestep = r.u32()?;
                    let code = r.u8()?;
                    let encoding = FrameEncoding::from_code(code).ok_or(ProtocolError::InvalidValue {
                        field: "frame encoding",
                        value: code as u32,
                    })?;
                    ServerMessage::Frame {
                        tick,
                        timestep,
                        encoding,
                        width: r.u16()?,
                        height: r.u16()?,
                        data: r.rest().to_vec(),
                    }
                }
                MSG_EPISODE_END => {
                    let code = r.u8()?;
                    let reason = EndReason::from_code(code).ok_or(ProtocolError::InvalidValue {
                        field: "end reason",
                        value: code as u32,
                    })?;
                    let msg = ServerMessage::EpisodeEnd {
                        reason,
                        total_return: r.f64()?,
                        timesteps: r.u32()?,
                    };
                    trailing(kind, &r, 13)?;
                    msg
                }
                MSG_SESSION => {
                    let mode = match r.u8()? {
                        0 => Mode::Practice,
                        1 => Mode::Test,
                        v => {
                            return Err(ProtocolError::InvalidValue {
                                field: "mode",
                                value: v as u32,
                            })
                        }
                    };
                    let n = r.u16()? as usize;
                    let level = std::str::from_utf8(r.take(n)?)
                        .map_err(|_| ProtocolError::Utf8)?
                        .to_string();
                    let msg = ServerMessage::Session {
                        mode,
                        level,
                        remaining_secs: r.f64()?,
                        level_index: r.u16()?,
                        level_count: r.u16()?,
                        episode: r.u32()?,
                    };
                    trailing(kind, &r, 19 + n)?;
                    msg
                }
                MSG_SCORE => {
                    let msg = ServerMessage::Score {
                        episode_return: r.f64()?,
                        timestep: r.u32()?,
                        episodes: r.u32()?,
                    };
                    trailing(kind, &r, 16)?;
                    msg
                }
                other => return Err(ProtocolError::UnknownType(other)),
            };
            Ok(msg)
        })
        .collect()
}

/// Run-length encodes RGB pixels as `count | r | g | b` runs.
pub fn rle_encode(rgb: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut px = rgb.chunks_exact(3);
    let Some(first) = px.next() else {
        return out;
    };
    let mut cur = first;
    let mut run = 1u8;
    for p in px {
        if p == cur && run < u8::MAX {
            run += 1;
        } else {
            out.push(run);
            out.extend_from_slice(cur);
            cur = p;
            run = 1;
        }
    }
    out.push(run);
    out.extend_from_slice(cur);
    out
}

pub fn rle_decode(data: &[u8]) -> Result<Vec<u8>, ProtocolError> {
    if !data.len().is_multiple_of(4) {
        return Err(ProtocolError::Truncated {
            need: data.len().next_multiple_of(4),
            have: data.len(),
        });
    }
    let mut out = Vec::new();
    for run in data.chunks_exact(4) {
        if run[0] == 0 {
            return Err(ProtocolError::InvalidValue {
                field: "run length",
                value: 0,
            });
        }
        for _ in 0..run[0] {
            out.extend_from_slice(&run[1..]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use retrobench::Button;

    #[test]
    fn client_messages_round_trip() {
        let msgs = [
            ClientMessage::Input(Buttons::NONE.with(Button::Right).with(Button::B)),
            ClientMessage::Ready,
            ClientMessage::Pause(true),
            ClientMessage::Pause(false),
        ];
        let mut buf = Vec::new();
        for m in &msgs {
            m.encode_into(&mut buf);
        }
        assert_eq!(decode_client(&buf).unwrap(), msgs);
    }

    #[test]
    fn input_layout() {
        assert_eq!(
            ClientMessage::Input(Buttons::from_mask(0x0081).unwrap()).encode(),
            vec![3, 0, 0, 0, 0x10, 0x81, 0x00]
        );
        assert_eq!(ClientMessage::Ready.encode(), vec![1, 0, 0, 0, 0x11]);
    }

    #[test]
    fn every_button_composes_into_its_bit() {
        for (i, &b) in Button::ALL.iter().enumerate() {
            let bytes = ClientMessage::Input(Buttons::NONE.with(b)).encode();
            assert_eq!(u16::from_le_bytes([bytes[5], bytes[6]]), 1 << i);
        }
        let all = Button::ALL.iter().fold(Buttons::NONE, |acc, &b| acc.with(b));
        assert_eq!(all.mask(), 0x0FFF);
        assert_eq!(
            decode_client(&ClientMessage::Input(all).encode()).unwrap(),
            vec![ClientMessage::Input(all)]
        );
    }

    #[test]
    fn malformed_client_messages() {
        assert_eq!(decode_client(&[]), Err(ProtocolError::Empty));
        assert_eq!(
            decode_client(&[3, 0, 0, 0, 0x10, 0x00, 0x10]),
            Err(ProtocolError::InvalidMask(0x1000))
        );
        assert_eq!(
            decode_client(&[1, 0, 0, 0, 0x7f]),
            Err(ProtocolError::UnknownType(0x7f))
        );
        assert!(matches!(
            decode_client(&[2, 0, 0, 0, 0x11, 0]),
            Err(ProtocolError::BadLength { .. })
        ));
        assert!(matches!(
            decode_client(&[9, 0, 0, 0, 0x11]),
            Err(ProtocolError::Truncated { .. })
        ));
        assert!(matches!(
            decode_client(&[2, 0, 0, 0, 0x12, 7]),
            Err(ProtocolError::InvalidValue { .. })
        ));
        assert!(matches!(
            decode_client(&[1, 0, 0]),
            Err(ProtocolError::Truncated { .. })
        ));
    }

    #[test]
    fn server_messages_round_trip() {
        let msgs = vec![
            ServerMessage::Frame {
                tick: 7,
                timestep: 3,
                encoding: FrameEncoding::Rle,
                width: 320,
                height: 224,
                data: vec![1, 2, 3, 4],
            },
            ServerMessage::EpisodeEnd {
                reason: EndReason::Timeout,
                total_return: 12.5,
                timesteps: 4500,
            },
            ServerMessage::Session {
                mode: Mode::Test,
                level: "z03a1".into(),
                remaining_secs: 3599.5,
                level_index: 2,
                level_count: 11,
                episode: 9,
            },
            ServerMessage::Score {
                episode_return: -3.25,
                timestep: 17,
                episodes: 2,
            },
        ];
        let mut buf = Vec::new();
        for m in &msgs {
            m.encode_into(&mut buf);
        }
        assert_eq!(decode_server(&buf).unwrap(), msgs);
    }

    #[test]
    fn rle_round_trip() {
        let mut px = Vec::new();
        for i in 0..700u32 {
            let c = (i / 300) as u8;
            px.extend_from_slice(&[c, c, 9]);
        }
        let enc = rle_encode(&px);
        // 300 = 255 + 45, then another 300, then 100.
        assert_eq!(enc.len(), 5 * 4);
        assert_eq!(rle_decode(&enc).unwrap(), px);
        assert!(rle_encode(&[]).is_empty());
        assert!(rle_decode(&[0, 1, 2, 3]).is_err());
        assert!(rle_decode(&[1, 2]).is_err());
    }
}
