# Tests package for Majority Lab
