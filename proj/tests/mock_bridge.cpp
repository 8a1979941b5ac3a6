// Stand-in encoder worker for protocol tests.
//   mock_bridge [--dim N] [--wrong-dim] [--fail-start]
// Vectors are a deterministic function of the text.

#include <cstdint>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

std::vector<double> fake_embed(const std::string& text, std::size_t d) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) h = (h ^ c) * 1099511628211ULL;
  std::vector<double> v(d);
  for (auto& x : v) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    x = static_cast<double>(h % 2001) / 1000.0 - 1.0;
  }
  v[0] += 3.0;  // never the zero vector
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t d = 8;
  bool wrong_dim = false;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--dim") && i + 1 < argc) {
      d = std::stoul(argv[++i]);
    } else if (!std::strcmp(argv[i], "--wrong-dim")) {
      wrong_dim = true;
    } else if (!std::strcmp(argv[i], "--fail-start")) {
      std::cout << nlohmann::json{{"error", "model failed to load"}}.dump() << std::endl;
      return 3;
    }
  }
  std::cout << nlohmann::json{{"dimension", d}}.dump() << std::endl;

  std::string line;
  while (std::getline(std::cin, line)) {
    nlohmann::json resp;
    const auto req = nlohmann::json::parse(line, nullptr, false);
    if (!req.is_object() || !req.contains("request_id") || !req["text"].is_string()) {
      resp = {{"request_id", nullptr}, {"error", "malformed request"}};
    } else {
      resp["request_id"] = req["request_id"];
      const auto text = req["text"].get<std::string>();
      if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        resp["error"] = "empty text";
      } else {
        resp["vector"] = fake_embed(text, wrong_dim ? d + 1 : d);
      }
    }
    std::cout << resp.dump() << '\n';
    // Only flush when no more input is already buffered, so pipelined
    // requests get batched replies.
    if (std::cin.rdbuf()->in_avail() <= 0) std::cout.flush();
  }
  return 0;
}
