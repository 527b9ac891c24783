# RIS Service Package
