#include <cstdlib>
#include <iostream>
#include <string>

#include <httplib.h>

#include "geoseg/service.hpp"

int main() {
  int port = 8080;
  if (const char* p = std::getenv("GEOSEG_PORT")) {
    try {
      port = std::stoi(p);
    } catch (const std::exception&) {
      std::cerr << "GEOSEG_PORT is not a number: " << p << '\n';
      return 2;
    }
  }
  geoseg::SessionStore store;
  httplib::Server srv;
  geoseg::install_routes(srv, store);
  std::cerr << "listening on 0.0.0.0:" << port << '\n';
  if (!srv.listen("0.0.0.0", port)) {
    std::cerr << "cannot bind port " << port << '\n';
    return 1;
  }
  return 0;
}
