#include "pointstokes/driver.hpp"

int main(int argc, char** argv)
{
  return pointstokes::cli_main(argc, argv);
}
