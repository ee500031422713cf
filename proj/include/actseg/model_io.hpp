#pragma once

#include <string>

#include "actseg/crf.hpp"
#include "actseg/memm.hpp"
#include "actseg/phmm.hpp"

namespace actseg::io {

// Model files are JSON documents with a "family" tag ("crf", "memm", or
// "phmm"). Doubles round-trip bit-exactly.
void save_crf(const crf::CrfModel& model, const std::string& path);
crf::CrfModel load_crf(const std::string& path);

void save_memm(const memm::MemmModel& model, const std::string& path);
memm::MemmModel load_memm(const std::string& path);

void save_phmm(const phmm::PhmmModel& model, const std::string& path);
phmm::PhmmModel load_phmm(const std::string& path);

// Reads just the family tag, for dispatch.
std::string peek_model_family(const std::string& path);

}  // namespace actseg::io
