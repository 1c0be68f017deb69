// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace keys {

std::string to_lower(std::string_view text);

std::string trim(std::string_view text);

// True for ASCII alphanumerics and for any byte of a multi-byte UTF-8
// sequence, so non-ASCII words are never split.
bool is_word_byte(unsigned char c);

// Word tokenizer shared by the language model, keyword matching and metrics.
// Lowercases ASCII, keeps maximal runs of alphanumerics, hyphens and
// apostrophes, and strips hyphens/apostrophes from both ends of each run.
std::vector<std::string> word_tokens(std::string_view text);

// Retrieval tokenizer: lowercase, split on every non-alphanumeric byte.
std::vector<std::string> index_terms(std::string_view text);

std::string join(std::span<const std::string> words, std::string_view sep = " ");

std::vector<std::string> split_lines(std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace keys
