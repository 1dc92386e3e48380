// core/src/wav.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "switchsound/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace switchsound {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wav file: " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("not a RIFF/WAVE file: " + path.string());
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* pcm = nullptr;
  std::uint32_t pcm_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const char* tag = reinterpret_cast<const char*>(data.data() + pos);
    const std::uint32_t len = read_u32(data.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > data.size()) break;
    if (std::memcmp(tag, "fmt ", 4) == 0 && len >= 16) {
      format = read_u16(data.data() + body);
      channels = read_u16(data.data() + body + 2);
      sample_rate = read_u32(data.data() + body + 4);
      bits = read_u16(data.data() + body + 14);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      pcm = data.data() + body;
      pcm_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }

  if (pcm == nullptr || sample_rate == 0) {
    throw std::runtime_error("wav file missing fmt/data chunk: " + path.string());
  }
  if (channels != 1) {
    throw std::runtime_error("unsupported wav: " + std::to_string(channels) +
                             " channels (mono required): " + path.string());
  }

  Waveform w;
  w.sample_rate = static_cast<double>(sample_rate);
  w.event_id = path.stem().string();

  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = pcm_len / 2;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::int16_t v =
          static_cast<std::int16_t>(pcm[2 * i] | (pcm[2 * i + 1] << 8));
      w.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = pcm_len / 4;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, pcm + 4 * i, 4);
      w.samples[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
    }
  } else {
    throw std::runtime_error("unsupported wav encoding (PCM16 or float32 mono required): " +
                             path.string());
  }
  return w;
}

void write_wav_pcm16(const std::filesystem::path& path, const Waveform& w) {
  if (w.sample_rate <= 0.0) throw std::runtime_error("write_wav: sample rate must be positive");
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_len = n * 2;
  const std::uint32_t sr = static_cast<std::uint32_t>(std::lround(w.sample_rate));

  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, sr);
  put_u32(out, sr * 2);  // byte rate
  put_u16(out, 2);       // block align
  put_u16(out, 16);      // bits
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_len);
  for (double s : w.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const int v = static_cast<int>(std::lround(c * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write wav file: " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("wav write failed: " + path.string());
}

}  // namespace switchsound
