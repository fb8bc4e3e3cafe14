// Minimal line-protocol builder: one block at the origin, or at x=1 when help
// is present. "exit" as dialogue ends the process, "garbage" replies badly.
#include <cstdlib>
#include <iostream>
#include <string>

#include <json.hpp>

int main() {
  std::string line;
  while (std::getline(std::cin, line)) {
    auto req = nlohmann::json::parse(line);
    const auto dialogue = req.at("dialogue").get<std::string>();
    if (dialogue == "exit") return 3;
    if (dialogue == "garbage") {
      std::cout << "not json" << std::endl;
      continue;
    }
    const bool helped = !req.at("help").is_null();
    nlohmann::json reply = {{"utterance", helped ? "1 right 0 up 0 higher." : "0 right 0 up 0 higher."},
                            {"input", req.at("input")}};
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}
