#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gvg/tensor.hpp"

namespace gvg {

// Little-endian primitive IO against byte buffers.
void put_u16(std::string& buf, uint16_t v);
void put_u32(std::string& buf, uint32_t v);
void put_f32(std::string& buf, float v);
uint16_t get_u16(const std::string& buf, size_t& pos);
uint32_t get_u32(const std::string& buf, size_t& pos);
float get_f32(const std::string& buf, size_t& pos);

std::string read_file(const std::string& path);
// Write via a temp file + rename so partial writes never leave a torn file.
void write_file_atomic(const std::string& path, const std::string& bytes);

// 64-bit FNV-1a content hash, hex string. Provenance only, not cryptographic.
uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);
std::string file_hash(const std::string& path);

// Named-tensor checkpoint, magic "GVGT" version 1. Values are stored as
// little-endian f32 (downcast on save, upcast on load), so a load/save cycle
// reproduces the file byte for byte.
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& tensors);
std::map<std::string, Tensor> load_checkpoint(const std::string& path);

}  // namespace gvg
