// switchsound/wav.h

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

#ifndef SWITCHSOUND_WAV_H_
#define SWITCHSOUND_WAV_H_

#include <filesystem>

#include "switchsound/dsp.h"

namespace switchsound {

// Reads mono PCM 16-bit or IEEE float 32-bit WAV files. Samples are
// normalized to [-1, 1]; the event id defaults to the file stem.
// Multi-channel files are rejected with an explicit error.
Waveform read_wav(const std::filesystem::path& path);

// Writes mono PCM 16-bit. Samples are clamped to [-1, 1] before quantizing.
void write_wav_pcm16(const std::filesystem::path& path, const Waveform& w);

}  // namespace switchsound

#endif  // SWITCHSOUND_WAV_H_
