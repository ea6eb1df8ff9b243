use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use super::coloring::Coloring;
use super::graph::{requested_packets, ConflictGraph};
use crate::error::{invalid, Error, Result};
use crate::model::{DemandRealization, FileId};
use crate::placement::{CacheConfig, Packet};

/// Equal-length payload blocks for every packet of the library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayloadTable {
    files: usize,
    packets: usize,
    block_len: usize,
    data: Vec<u8>,
}

impl PayloadTable {
    /// Fills every block with pseudo-random bytes.
    pub fn random<R: RngCore + ?Sized>(
        files: usize,
        packets: usize,
        block_len: usize,
        rng: &mut R,
    ) -> Self {
        let mut data = vec![0u8; files * packets * block_len];
        rng.fill_bytes(&mut data);
        Self {
            files,
            packets,
            block_len,
            data,
        }
    }

    /// Builds a table from per-packet blocks, `blocks[file_index * B + index]`.
    pub fn from_blocks(files: usize, packets: usize, blocks: Vec<Vec<u8>>) -> Result<Self> {
        if blocks.len() != files * packets {
            return Err(invalid("payload table needs one block per packet"));
        }
        let block_len = blocks.first().map_or(0, Vec::len);
        if blocks.iter().any(|b| b.len() != block_len) {
            return Err(invalid("payload blocks must have equal length"));
        }
        Ok(Self {
            files,
            packets,
            block_len,
            data: blocks.concat(),
        })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn get(&self, packet: Packet) -> Option<&[u8]> {
        if packet.file.0 == 0
            || packet.file.index() >= self.files
            || packet.index as usize >= self.packets
        {
            return None;
        }
        let start = (packet.file.index() * self.packets + packet.index as usize) * self.block_len;
        Some(&self.data[start..start + self.block_len])
    }
}

/// One broadcast transmission: the XOR of the distinct packets of a color class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    /// Distinct packets combined in this codeword, sorted.
    pub packets: Vec<Packet>,
    pub data: Vec<u8>,
}

/// The coded multicast message, one codeword per color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastCode {
    pub block_len: usize,
    pub codewords: Vec<Codeword>,
}

fn xor_into(acc: &mut [u8], block: &[u8]) {
    for (a, b) in acc.iter_mut().zip(block) {
        *a ^= b;
    }
}

/// XOR-encodes every color class of a proper coloring.
///
/// When several vertices of one class carry the same packet (several users
/// request it), the packet enters the codeword once.
pub fn encode(
    graph: &ConflictGraph,
    coloring: &Coloring,
    payloads: &PayloadTable,
) -> Result<MulticastCode> {
    coloring.check_proper(graph)?;
    let block_len = payloads.block_len();
    let codewords = coloring
        .classes()
        .into_iter()
        .map(|class| {
            let mut packets: Vec<Packet> = class.iter().map(|&v| graph.vertex(v).packet).collect();
            packets.sort_unstable();
            packets.dedup();
            let mut data = vec![0u8; block_len];
            for &p in &packets {
                let block = payloads.get(p).ok_or(Error::MissingPayload {
                    file: p.file.0,
                    index: p.index,
                })?;
                xor_into(&mut data, block);
            }
            Ok(Codeword { packets, data })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MulticastCode {
        block_len,
        codewords,
    })
}

/// Recovers the packets `user` requested from the broadcast and its own cache.
///
/// Only the payloads of packets in the user's cache are read from `payloads`.
pub fn decode(
    user: usize,
    code: &MulticastCode,
    caches: &CacheConfig,
    demands: &DemandRealization,
    payloads: &PayloadTable,
) -> Result<BTreeMap<Packet, Vec<u8>>> {
    if user >= caches.users() || user >= demands.users() {
        return Err(invalid("user out of range"));
    }
    let wanted = requested_packets(caches, demands, user);
    let file: FileId = demands.file_of(user);
    let mut recovered = BTreeMap::new();
    for codeword in &code.codewords {
        let mut unknown = codeword
            .packets
            .iter()
            .filter(|&&p| !caches.contains(user, p));
        // Classes with two or more unknown packets carry nothing for this user;
        // its own vertices sit in classes where everything else is cached.
        let (Some(&target), None) = (unknown.next(), unknown.next()) else {
            continue;
        };
        if target.file != file || wanted.binary_search(&target).is_err() {
            continue;
        }
        let mut data = codeword.data.clone();
        for &p in codeword.packets.iter().filter(|&&p| p != target) {
            let block = payloads.get(p).ok_or(Error::MissingPayload {
                file: p.file.0,
                index: p.index,
            })?;
            xor_into(&mut data, block);
        }
        recovered.insert(target, data);
    }
    if let Some(p) = wanted.iter().find(|p| !recovered.contains_key(p)) {
        return Err(Error::DecodeFailure {
            user,
            file: p.file.0,
            index: p.index,
        });
    }
    Ok(recovered)
}

/// Delivery rate in file units, `min(K / B, D)` with `D` the number of
/// distinct requested files (the naive multicast fallback).
pub fn delivery_rate(coloring: &Coloring, demands: &DemandRealization, packets: usize) -> f64 {
    let coded = coloring.count() as f64 / packets as f64;
    coded.min(demands.distinct_files() as f64)
}
