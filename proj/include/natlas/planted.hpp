#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "natlas/language.hpp"
#include "natlas/model.hpp"

namespace natlas {

// Ground truth for a planted checkpoint: which (layer, neuron) slots carry
// which language. Pairs are kept sorted.
struct PlantLedger {
    std::map<std::string, std::vector<std::pair<int, int>>> neurons;

    std::string to_json() const;
    static PlantLedger from_json(const std::string& text);
    void save(const std::string& path) const;
    static PlantLedger load(const std::string& path);
};

struct PlantOptions {
    ModelConfig config;   // vocab_size must cover the byte tokenizer
    uint64_t seed = 0;    // noise streams
    int per_lang = 8;     // slots per language when auto-assigning
    int plant_layer = -1; // -1: n_layers / 2
    // Explicit slot map (lang -> (layer, neuron) list); empty = auto-assign.
    std::map<std::string, std::vector<std::pair<int, int>>> slots;
};

// Builds a checkpoint whose planted neurons fire (tap > 0) exactly on tokens
// of their language and never otherwise, with zero attention so the algebra
// stays exact. Generation from it locks onto a prompted or forced language,
// and under set-negative deactivation the output falls down the priority
// chain. Requires pairwise-disjoint single-byte alphabets.
std::pair<Checkpoint, PlantLedger> plant_model(const std::vector<LanguageSpec>& specs,
                                               const PlantOptions& opt);

// Constants documented for tests: pre-activations hit by planted neurons on
// and off language, and the guaranteed on-language tap floor.
inline constexpr float kPlantZOn = 4.2f;
inline constexpr float kPlantZOff = -8.0f;
inline constexpr float kPlantMinOnTap = 4.0f;
inline constexpr float kPlantNoiseScale = 0.02f;
inline constexpr float kPlantReadout = 30.0f;    // unembed weight on language outputs
inline constexpr float kPlantBiasRead = 0.5f;    // unembed weight on the bias coord
// Residual leak per priority rank r (1-based): rank 1 decays least, so under
// full deactivation the top-priority language persists.
inline float plant_leak(int rank) { return 0.02f + 0.01f * float(rank - 1); }

}  // namespace natlas
