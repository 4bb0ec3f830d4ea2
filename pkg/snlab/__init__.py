# snlab: p-adic singular numbers and Hall-Littlewood processes
