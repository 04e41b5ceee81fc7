# Heyo
