# Games package: the BaseGame interface and the concrete game families
