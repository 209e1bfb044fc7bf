#ifndef TSG_VERSION_HPP
#define TSG_VERSION_HPP

#define TSG_VERSION_STRING "0.1.0"

#endif
