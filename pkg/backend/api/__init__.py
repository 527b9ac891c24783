# API package: settings and the HTTP surface
