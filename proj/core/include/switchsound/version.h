// switchsound/version.h

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

#ifndef SWITCHSOUND_VERSION_H_
#define SWITCHSOUND_VERSION_H_

namespace switchsound {

inline constexpr const char* kVersion = "0.1.0";

// Format version tags for persisted artifacts. Bump on schema change.
inline constexpr const char* kDictionaryMagic = "switchsound-dictionary v1";
inline constexpr const char* kCleanlinessMagic = "switchsound-cleanliness v1";
inline constexpr const char* kNormalModelMagic = "switchsound-normal-model v1";
inline constexpr const char* kThresholdsMagic = "switchsound-thresholds v1";
inline constexpr const char* kBundleMagic = "switchsound-bundle v1";
inline constexpr int kManifestVersion = 1;
inline constexpr int kLedgerVersion = 1;

}  // namespace switchsound

#endif  // SWITCHSOUND_VERSION_H_
